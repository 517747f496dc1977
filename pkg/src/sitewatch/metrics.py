"""Static grid and dynamic (per-frame) evaluation.

Static evaluation scores one decision per (site, angle, distance) point and
reports success percentages per distance x angle cell.  Means are reported
two ways: "rounded-cell" means average the integer-rounded cell percents,
exact means divide raw success counts.  Both round half-up to one decimal.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import DesignError, UndefinedMetricError, ValidationError
from .frames import ANGLES_DEG, DISTANCES_M, SITE_IDS
from .voter import smooth_stream


def _round_half_up(x: Fraction, places: int = 0) -> Fraction:
    scale = 10 ** places
    return Fraction(math.floor(x * scale + Fraction(1, 2)), scale)


def cell_rate(successes: int, total: int) -> int:
    """Success percentage rounded half-up to an integer."""
    if total <= 0:
        raise UndefinedMetricError(f"rate undefined for total={total}")
    if not 0 <= successes <= total:
        raise ValueError(f"successes={successes} outside [0, {total}]")
    return (200 * successes + total) // (2 * total)


def percent1(x: Fraction) -> float:
    """Round a percentage half-up to one decimal."""
    return float(_round_half_up(Fraction(x), 1))


# -- static grid --------------------------------------------------------------

class EvalPoint(NamedTuple):
    site_id: int
    angle_deg: int
    distance_m: int
    success: bool


@dataclass(frozen=True)
class StaticReport:
    distances: tuple[int, ...]
    angles: tuple[int, ...]
    successes: Mapping[tuple[int, int], int]
    per_cell: int
    cells: Mapping[tuple[int, int], int]
    row_means: Mapping[int, float]
    col_means: Mapping[int, float]
    exact_row_means: Mapping[int, float]
    exact_col_means: Mapping[int, float]
    cell_mean: float
    overall_successes: int
    overall_total: int

    @property
    def overall(self) -> float:
        """Overall success percent from raw counts (not rounded)."""
        return 100 * self.overall_successes / self.overall_total

    def to_obj(self) -> dict:
        return {
            "distances_m": list(self.distances),
            "angles_deg": list(self.angles),
            "points_per_cell": self.per_cell,
            "cells": [
                {"distance_m": d, "angle_deg": a, "successes": self.successes[d, a],
                 "total": self.per_cell, "percent": self.cells[d, a]}
                for d in self.distances for a in self.angles
            ],
            "rounded_cell_means": {
                "by_distance": {str(d): self.row_means[d] for d in self.distances},
                "by_angle": {str(a): self.col_means[a] for a in self.angles},
                "all_cells": self.cell_mean,
            },
            "exact_means": {
                "by_distance": {str(d): self.exact_row_means[d] for d in self.distances},
                "by_angle": {str(a): self.exact_col_means[a] for a in self.angles},
            },
            "overall": {
                "successes": self.overall_successes,
                "total": self.overall_total,
                "percent": round(self.overall, 2),
            },
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["distance_m", *self.angles, "mean", "exact_mean"])
        for d in self.distances:
            w.writerow([d, *(self.cells[d, a] for a in self.angles),
                        self.row_means[d], self.exact_row_means[d]])
        w.writerow(["mean", *(self.col_means[a] for a in self.angles), self.cell_mean, ""])
        exact_all = percent1(Fraction(100 * self.overall_successes, self.overall_total))
        w.writerow(["exact_mean", *(self.exact_col_means[a] for a in self.angles), "", exact_all])
        w.writerow(["overall", f"{self.overall_successes}/{self.overall_total}",
                    f"{self.overall:.2f}"])
        return buf.getvalue()


def grid_report(points: Iterable[EvalPoint]) -> StaticReport:
    points = list(points)
    if not points:
        raise DesignError("no evaluation points")
    seen = set()
    tally: dict[tuple[int, int], list[int]] = {}
    for p in points:
        key = (p.site_id, p.angle_deg, p.distance_m)
        if key in seen:
            raise DesignError(f"duplicate point site {p.site_id} at {p.distance_m} m/{p.angle_deg} deg")
        seen.add(key)
        cell = tally.setdefault((p.distance_m, p.angle_deg), [0, 0])
        cell[0] += bool(p.success)
        cell[1] += 1
    distances = tuple(sorted({d for d, _ in tally}))
    angles = tuple(sorted({a for _, a in tally}))
    missing = [(d, a) for d in distances for a in angles if (d, a) not in tally]
    if missing:
        raise DesignError("ragged design", missing)
    sizes = {t for _, t in tally.values()}
    if len(sizes) != 1:
        uneven = ", ".join(f"{d} m/{a} deg: {t}" for (d, a), (_, t) in sorted(tally.items()))
        raise DesignError(f"unequal points per cell ({uneven})")
    per_cell = sizes.pop()

    succ = {k: v[0] for k, v in tally.items()}
    cells = {k: cell_rate(s, per_cell) for k, s in succ.items()}
    nd, na = len(distances), len(angles)
    row_means = {d: percent1(Fraction(sum(cells[d, a] for a in angles), na)) for d in distances}
    col_means = {a: percent1(Fraction(sum(cells[d, a] for d in distances), nd)) for a in angles}
    exact_row = {d: percent1(Fraction(100 * sum(succ[d, a] for a in angles), na * per_cell))
                 for d in distances}
    exact_col = {a: percent1(Fraction(100 * sum(succ[d, a] for d in distances), nd * per_cell))
                 for a in angles}
    cell_mean = percent1(Fraction(sum(cells.values()), len(cells)))
    total_succ = sum(succ.values())
    return StaticReport(distances, angles, succ, per_cell, cells, row_means, col_means,
                        exact_row, exact_col, cell_mean, total_succ, per_cell * len(cells))


def point_from_obj(obj: dict, where: str = "point") -> EvalPoint:
    site, angle, dist, ok = (obj.get(k) for k in ("site_id", "angle_deg", "distance_m", "success"))
    if type(site) is not int or site not in SITE_IDS:
        raise ValidationError(f"{where}.site_id", f"must be an integer 1-7, got {site!r}")
    if type(angle) is not int or angle not in ANGLES_DEG:
        raise ValidationError(f"{where}.angle_deg", f"must be one of {ANGLES_DEG}, got {angle!r}")
    if type(dist) is not int or dist not in DISTANCES_M:
        raise ValidationError(f"{where}.distance_m", f"must be one of {DISTANCES_M}, got {dist!r}")
    if type(ok) is not bool:
        raise ValidationError(f"{where}.success", "must be a boolean")
    return EvalPoint(site, angle, dist, ok)


def _jsonl_objects(lines: Iterable[str]):
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {lineno}", f"malformed JSON: {exc.msg}") from None
        if type(obj) is not dict:
            raise ValidationError(f"line {lineno}", "expected a JSON object")
        yield lineno, obj


def read_points(lines: Iterable[str]) -> list[EvalPoint]:
    return [point_from_obj(obj, f"line {n}") for n, obj in _jsonl_objects(lines)]


def read_pairs(lines: Iterable[str]) -> list[tuple[bool, bool]]:
    """(truth, predicted) pairs from JSONL objects with those two boolean keys."""
    out = []
    for n, obj in _jsonl_objects(lines):
        t, p = obj.get("truth"), obj.get("predicted")
        if type(t) is not bool or type(p) is not bool:
            raise ValidationError(f"line {n}", "truth and predicted must be booleans")
        out.append((t, p))
    return out


# -- dynamic ------------------------------------------------------------------

class ConfusionMatrix(NamedTuple):
    tp: int
    fn: int
    fp: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


def confusion(pairs: Iterable[tuple[bool, bool]]) -> ConfusionMatrix:
    tp = fn = fp = tn = 0
    for truth, pred in pairs:
        if truth:
            if pred:
                tp += 1
            else:
                fn += 1
        elif pred:
            fp += 1
        else:
            tn += 1
    if tp + fn + fp + tn == 0:
        raise UndefinedMetricError("confusion matrix of an empty sequence")
    return ConfusionMatrix(tp, fn, fp, tn)


METRIC_NAMES = ("accuracy", "error_rate", "precision", "recall", "f1", "specificity")


@dataclass(frozen=True)
class DynamicMetrics:
    """Per-frame classification metrics; a metric whose denominator is zero is None."""
    accuracy: float
    error_rate: float
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    specificity: Optional[float]
    matrix: ConfusionMatrix
    undefined: tuple[str, ...] = field(default=())

    def get(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise UndefinedMetricError(f"{name} is undefined for {self.matrix}")
        return value

    def to_obj(self) -> dict:
        m = self.matrix
        return {
            "confusion": {"tp": m.tp, "fn": m.fn, "fp": m.fp, "tn": m.tn},
            **{name: getattr(self, name) for name in METRIC_NAMES},
        }


def derive_metrics(cm: ConfusionMatrix) -> DynamicMetrics:
    tp, fn, fp, tn = cm
    if min(cm) < 0 or cm.total == 0:
        raise UndefinedMetricError(f"metrics need non-negative counts with a positive total, got {cm}")
    accuracy = (tp + tn) / cm.total
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    # harmonic mean of precision and recall, written on counts
    f1 = 2 * tp / (2 * tp + fp + fn) if precision is not None and recall is not None else None
    specificity = tn / (tn + fp) if tn + fp else None
    values = dict(precision=precision, recall=recall, f1=f1, specificity=specificity)
    undefined = tuple(k for k, v in values.items() if v is None)
    return DynamicMetrics(accuracy, 1 - accuracy, precision, recall, f1, specificity, cm, undefined)


def k_sweep(raw_decisions: Sequence[bool], truths: Sequence[bool],
            ks: Iterable[int]) -> dict[int, DynamicMetrics]:
    if len(raw_decisions) != len(truths):
        raise ValueError(f"length mismatch: {len(raw_decisions)} decisions vs {len(truths)} truths")
    out = {}
    for k in ks:
        smoothed = smooth_stream(raw_decisions, k)
        out[k] = derive_metrics(confusion(zip(truths, smoothed)))
    return out


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.4f}"


def sweep_csv(sweep: Mapping[int, DynamicMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", *METRIC_NAMES])
    for k, m in sweep.items():
        w.writerow([k, *(_fmt(getattr(m, name)) for name in METRIC_NAMES)])
    return buf.getvalue()


def metrics_csv(m: DynamicMetrics) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tp", "fn", "fp", "tn", *METRIC_NAMES])
    w.writerow([*m.matrix, *(_fmt(getattr(m, name)) for name in METRIC_NAMES)])
    return buf.getvalue()
