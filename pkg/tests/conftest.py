"""Shared fixtures and the per-criterion acceptance summary."""
from __future__ import annotations

from collections import OrderedDict

_ACCEPTANCE: "OrderedDict[int, dict]" = OrderedDict()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is None:
            continue
        number, title = mark.args
        entry = _ACCEPTANCE.setdefault(number, {"title": title, "results": OrderedDict(),
                                                "notes": []})
        entry["results"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _ACCEPTANCE.values():
        if report.nodeid in entry["results"]:
            if report.when == "call" or report.outcome != "passed":
                previous = entry["results"][report.nodeid]
                if previous != "failed":
                    entry["results"][report.nodeid] = report.outcome
            if report.when == "call":
                entry["notes"] += [f"{k}: {v}" for k, v in report.user_properties]


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        results = entry["results"]
        if any(r is None for r in results.values()):
            status = "NOT RUN"
        elif all(r == "passed" for r in results.values()):
            status = "PASS"
        else:
            status = "FAIL"
        tr.write_line(f"criterion {number}: {status}  {entry['title']}")
        for note in entry["notes"]:
            tr.write_line(f"    {note}")
        if status == "FAIL":
            for nodeid, outcome in results.items():
                if outcome != "passed":
                    tr.write_line(f"    {outcome}: {nodeid.split('::')[-1]}")

