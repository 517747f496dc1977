from __future__ import annotations

import csv
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import percent_half_up
from sitewatch.errors import DesignError, UndefinedMetricError
from sitewatch.fixtures import GRID_SUCCESSES, data_path
from sitewatch.metrics import (ConfusionMatrix, EvalPoint, cell_rate, confusion, derive_metrics,
                               grid_report, k_sweep, metrics_csv, read_pairs, read_points,
                               sweep_csv)

ANGLES = (0, 15, 30, 45, 60, 75)


@pytest.mark.parametrize("s, t, pct", [(6, 7, 86), (3, 7, 43), (7, 7, 100), (4, 7, 57),
                                       (0, 7, 0), (1, 8, 13), (1, 200, 1), (1, 201, 0)])
def test_cell_rate(s, t, pct):
    assert cell_rate(s, t) == pct


def test_cell_rate_undefined():
    with pytest.raises(UndefinedMetricError):
        cell_rate(0, 0)


@settings(max_examples=500)
@given(st.integers(1, 1000).flatmap(lambda t: st.tuples(st.integers(0, t), st.just(t))))
def test_cell_rate_matches_fraction_oracle(st_):
    s, t = st_
    assert cell_rate(s, t) == percent_half_up(s, t)
    assert 0 <= cell_rate(s, t) <= 100


def _points_from_counts(table):
    points = []
    for d, row in table.items():
        for a, succ in zip(ANGLES, row):
            for site in range(1, 8):
                points.append(EvalPoint(site, a, d, site <= succ))
    return points


def test_grid_from_target_counts():
    r = grid_report(_points_from_counts(GRID_SUCCESSES))
    assert [r.cells[8, a] for a in ANGLES] == [86, 86, 100, 86, 86, 57]
    assert [r.row_means[d] for d in (2, 4, 6, 8, 10)] == [100, 100, 95.3, 83.5, 64.3]
    assert [r.exact_row_means[d] for d in (6, 8, 10)] == [95.2, 83.3, 64.3]
    assert r.exact_col_means[75] == 77.1 and r.col_means[75] == 77.2
    assert (r.overall_successes, r.overall_total) == (186, 210)
    assert round(r.overall, 2) == 88.57


def test_single_cell():
    r = grid_report([EvalPoint(s, 0, 2, True) for s in range(1, 8)])
    assert r.cells == {(2, 0): 100} and r.row_means == {2: 100} and r.cell_mean == 100


def test_design_errors():
    with pytest.raises(DesignError):
        grid_report([])
    with pytest.raises(DesignError):
        grid_report([EvalPoint(1, 0, 2, True), EvalPoint(1, 0, 2, False)])
    with pytest.raises(DesignError) as exc:
        grid_report([EvalPoint(1, 0, 2, True), EvalPoint(1, 15, 4, True)])
    assert set(exc.value.missing) == {(2, 15), (4, 0)}
    with pytest.raises(DesignError):
        grid_report([EvalPoint(1, 0, 2, True), EvalPoint(2, 0, 2, True), EvalPoint(1, 15, 2, True)])


def test_report_outputs():
    r = grid_report(_points_from_counts(GRID_SUCCESSES))
    rows = list(csv.reader(io.StringIO(r.to_csv())))
    assert rows[0] == ["distance_m", *map(str, ANGLES), "mean", "exact_mean"]
    assert rows[5] == ["10", "86", "86", "57", "57", "57", "43", "64.3", "64.3"]
    assert rows[-1] == ["overall", "186/210", "88.57"]
    obj = json.loads(json.dumps(r.to_obj()))
    assert obj["rounded_cell_means"]["by_distance"]["8"] == 83.5
    assert obj["exact_means"]["by_distance"]["8"] == 83.3


def test_shipped_points_file():
    with open(data_path("static_points.jsonl"), encoding="utf-8") as fh:
        r = grid_report(read_points(fh))
    assert r.overall_successes == 186


def test_confusion_examples():
    assert confusion([(True, True)]) == ConfusionMatrix(1, 0, 0, 0)
    assert confusion([(True, False), (False, True)]) == ConfusionMatrix(0, 1, 1, 0)
    with pytest.raises(UndefinedMetricError):
        confusion([])


def test_dynamic_fixture_matrix():
    with open(data_path("dynamic_pairs.jsonl"), encoding="utf-8") as fh:
        cm = confusion(read_pairs(fh))
    assert cm == ConfusionMatrix(tp=2907, fn=886, fp=1151, tn=9921)


def test_derive_metrics_examples():
    m = derive_metrics(ConfusionMatrix(2907, 886, 1151, 9921))
    assert round(m.accuracy, 4) == 0.8630
    assert round(m.precision, 4) == 0.7164
    assert round(m.recall, 4) == 0.7664
    assert round(m.f1, 4) == 0.7405
    assert m.specificity == 9921 / 11072
    perfect = derive_metrics(ConfusionMatrix(5, 0, 0, 9))
    assert (perfect.accuracy, perfect.error_rate) == (1.0, 0.0)


def test_undefined_metrics_reported_individually():
    m = derive_metrics(ConfusionMatrix(0, 0, 3, 4))
    assert m.precision == 0.0 and m.recall is None and m.f1 is None
    assert m.specificity == 4 / 7
    assert set(m.undefined) == {"recall", "f1"}
    assert set(derive_metrics(ConfusionMatrix(0, 3, 0, 4)).undefined) == {"precision", "f1"}
    with pytest.raises(UndefinedMetricError):
        m.get("recall")


matrices = st.builds(ConfusionMatrix, *(st.integers(0, 10_000) for _ in range(4))) \
    .filter(lambda cm: cm.total > 0)


@settings(max_examples=500)
@given(matrices)
def test_metric_identities(cm):
    m = derive_metrics(cm)
    assert round(m.accuracy * cm.total) == cm.tp + cm.tn
    if m.f1 is not None:
        lo, hi = sorted((m.precision, m.recall))
        assert lo - 1e-12 <= m.f1 <= hi + 1e-12
        if cm.fp == cm.fn:
            assert m.f1 == pytest.approx(m.precision) == pytest.approx(m.recall)


def test_k_sweep():
    truth = [True] * 30 + [False] * 30
    sweep = k_sweep(truth, truth, [1, 5, 9])
    assert list(sweep) == [1, 5, 9]
    assert sweep[1].accuracy == 1.0
    assert sweep[9].matrix.fp == 4
    noisy = list(truth)
    noisy[10] = False
    assert k_sweep(noisy, truth, [1])[1] == derive_metrics(confusion(zip(truth, noisy)))
    with pytest.raises(ValueError):
        k_sweep([True], [True, False], [1])


def test_constant_correct_stream_every_k():
    truth = [True] * 200
    assert all(m.accuracy == 1.0 for m in k_sweep(truth, truth, [1, 10, 50, 100]).values())


def test_csv_writers():
    m = derive_metrics(ConfusionMatrix(2907, 886, 1151, 9921))
    assert metrics_csv(m).splitlines()[1].startswith("2907,886,1151,9921,0.8630,")
    assert sweep_csv({1: m}).splitlines()[0] == "k,accuracy,error_rate,precision,recall,f1,specificity"
