"""Between-group ROC area (ABROCA) and per-pair fairness reports.

ABROCA is the definite integral over FPR in [0,1] of the absolute TPR
difference between two groups' ROC curves. Both curves are piecewise linear,
so the integral is computed in closed form: the FPR axis is cut at every
breakpoint of either curve plus every point where the two segments cross,
and each piece contributes a trapezoid of |difference|. No quadrature grid
is involved, which keeps symmetry and identity exact.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .errors import AuditError, MetricError
from .grouping import Dimension, slice_predictions
from .metrics import Prediction, RocCurve, auc_trapezoid, roc_curve
from .slam_format import Track

REPORT_SCHEMA_VERSION = 1

DEFAULT_MIN_GROUP_SIZE = 50


@dataclass(frozen=True)
class AbrocaResult:
    group_a: str
    group_b: str
    abroca: float
    auc_a: float
    auc_b: float
    n_a: int
    n_b: int
    curve_a: RocCurve
    curve_b: RocCurve

    def __post_init__(self):
        if not (0.0 <= self.abroca <= 1.0):
            raise AuditError(f"abroca out of range: {self.abroca!r}")
        if self.abroca < abs(self.auc_a - self.auc_b) - 1e-9:
            raise AuditError("abroca below the AUC-difference lower bound")
        if self.n_a < 1 or self.n_b < 1:
            raise AuditError("group sample counts must be positive")


@dataclass(frozen=True)
class AbrocaReport:
    track: Track
    dimension: Dimension
    model: str
    results: tuple[AbrocaResult, ...]
    skipped: tuple[tuple[str, str], ...]  # (group name, reason)
    config_hashes: tuple[tuple[str, str], ...]


def interpolate_tpr(curve: RocCurve, fpr_grid: Sequence[float]) -> list[float]:
    """TPR at each grid FPR; at a vertical jump, the supremum TPR applies."""
    prev = None
    for x in fpr_grid:
        if not (0.0 <= x <= 1.0):
            raise MetricError(f"grid value {x!r} outside [0, 1]")
        if prev is not None and x < prev:
            raise MetricError("grid must be sorted ascending")
        prev = x
    xs = [p[0] for p in curve.points]
    ys = [p[1] for p in curve.points]
    out = []
    for x in fpr_grid:
        j = bisect_right(xs, x)
        i = j - 1  # last point with xs[i] <= x; xs[0] = 0 <= x guarantees i >= 0
        if xs[i] == x:
            out.append(ys[i])  # last point at x = top of any jump
        else:
            x0, y0, x1, y1 = xs[i], ys[i], xs[j], ys[j]
            out.append(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    return out


def _segments(points: Sequence[tuple[float, float]]):
    """Non-vertical segments; together they cover all of [0, 1]."""
    return [
        (x0, y0, x1, y1)
        for (x0, y0), (x1, y1) in zip(points, points[1:])
        if x1 > x0
    ]


def _value_at(seg, x: float) -> float:
    x0, y0, x1, y1 = seg
    if x == x0:
        return y0
    if x == x1:
        return y1
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def difference_intervals(
    curve_a: RocCurve, curve_b: RocCurve
) -> list[tuple[float, float, float, float, float, float]]:
    """Cut [0,1] where either curve bends or the curves cross.

    Returns (x0, x1, ya0, ya1, yb0, yb1) tuples; inside each interval both
    curves are linear and their difference does not change sign, so the
    region between them is a simple quad. Shared by the integral below and
    by plot shading.
    """
    segs_a = _segments(curve_a.points)
    segs_b = _segments(curve_b.points)
    xs = sorted({x for x, _ in curve_a.points} | {x for x, _ in curve_b.points})
    ia = ib = 0
    out = []
    for u0, u1 in zip(xs, xs[1:]):
        while segs_a[ia][2] <= u0:
            ia += 1
        while segs_b[ib][2] <= u0:
            ib += 1
        ya0, ya1 = _value_at(segs_a[ia], u0), _value_at(segs_a[ia], u1)
        yb0, yb1 = _value_at(segs_b[ib], u0), _value_at(segs_b[ib], u1)
        d0, d1 = ya0 - yb0, ya1 - yb1
        if (d0 > 0.0 and d1 < 0.0) or (d0 < 0.0 and d1 > 0.0):
            t = d0 / (d0 - d1)
            xc = u0 + t * (u1 - u0)
            yca = ya0 + t * (ya1 - ya0)
            ycb = yb0 + t * (yb1 - yb0)
            out.append((u0, xc, ya0, yca, yb0, ycb))
            out.append((xc, u1, yca, ya1, ycb, yb1))
        else:
            out.append((u0, u1, ya0, ya1, yb0, yb1))
    return out


def abroca(curve_a: RocCurve, curve_b: RocCurve) -> float:
    """Exact integral of |TPR_a - TPR_b| over FPR in [0, 1]."""
    total = 0.0
    for x0, x1, ya0, ya1, yb0, yb1 in difference_intervals(curve_a, curve_b):
        total += (abs(ya0 - yb0) + abs(ya1 - yb1)) / 2.0 * (x1 - x0)
    return total


def group_audit(
    preds: Iterable[Prediction],
    dimension: Dimension,
    *,
    model: str,
    min_group_size: int = DEFAULT_MIN_GROUP_SIZE,
    config_hashes: Mapping[str, str] | None = None,
) -> AbrocaReport:
    """Pairwise ABROCA across all valid groups along one dimension.

    Groups smaller than ``min_group_size`` or containing a single class are
    skipped with a reason rather than audited; fewer than two surviving
    groups is an error. Pairs are ordered by group name so reports are
    deterministic.
    """
    preds = list(preds)
    if not preds:
        raise AuditError("no predictions to audit")
    for p in preds:
        if p.group is None:
            raise AuditError(f"prediction {p.instance_id!r} carries no group tag")
    tracks = {p.group.track for p in preds}
    if len(tracks) != 1:
        names = ", ".join(sorted(t.value for t in tracks))
        raise AuditError(f"predictions span multiple tracks: {names}")
    (track,) = tracks

    slices = slice_predictions(preds, dimension)
    valid: dict[str, list[Prediction]] = {}
    skipped: list[tuple[str, str]] = []
    for name in sorted(slices):
        members = slices[name]
        labels = {p.label for p in members}
        if len(members) < min_group_size:
            skipped.append(
                (name, f"{len(members)} predictions, below the minimum of {min_group_size}")
            )
        elif len(labels) < 2:
            skipped.append((name, "single class, ROC undefined"))
        else:
            valid[name] = members

    if len(valid) < 2:
        raise AuditError(
            f"fewer than two valid groups along {dimension.value} "
            f"(valid: {sorted(valid) or 'none'})"
        )

    curves = {name: roc_curve(members) for name, members in valid.items()}
    results = []
    for a, b in combinations(sorted(valid), 2):
        results.append(
            AbrocaResult(
                group_a=a,
                group_b=b,
                abroca=abroca(curves[a], curves[b]),
                auc_a=auc_trapezoid(curves[a]),
                auc_b=auc_trapezoid(curves[b]),
                n_a=len(valid[a]),
                n_b=len(valid[b]),
                curve_a=curves[a],
                curve_b=curves[b],
            )
        )
    return AbrocaReport(
        track=track,
        dimension=dimension,
        model=model,
        results=tuple(results),
        skipped=tuple(skipped),
        config_hashes=tuple(sorted((config_hashes or {}).items())),
    )


def _curve_payload(curve: RocCurve) -> dict:
    return {
        "points": [[x, y] for x, y in curve.points],
        "positives": curve.positives,
        "negatives": curve.negatives,
    }


def report_to_dict(report: AbrocaReport) -> dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "track": report.track.value,
        "dimension": report.dimension.value,
        "model": report.model,
        "config_hashes": dict(report.config_hashes),
        "results": [
            {
                "group_a": r.group_a,
                "group_b": r.group_b,
                "abroca": r.abroca,
                "auc_a": r.auc_a,
                "auc_b": r.auc_b,
                "n_a": r.n_a,
                "n_b": r.n_b,
                "curve_a": _curve_payload(r.curve_a),
                "curve_b": _curve_payload(r.curve_b),
            }
            for r in report.results
        ],
        "skipped": [
            {"group": name, "reason": reason} for name, reason in report.skipped
        ],
    }


def report_to_json(report: AbrocaReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def report_to_csv(report: AbrocaReport) -> str:
    """One row per group pair, flat layout for spreadsheet import."""
    lines = ["group_1,group_2,track,model,abroca"]
    for r in report.results:
        lines.append(
            f"{r.group_a},{r.group_b},{report.track.value},{report.model},{r.abroca!r}"
        )
    return "\n".join(lines) + "\n"
