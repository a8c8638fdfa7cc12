"""Classification accuracy metrics: ROC curves, AUC, precision/recall/F1.

AUC is computed two independent ways (trapezoidal integration of the ROC
curve, and the Mann-Whitney rank statistic) so each serves as an oracle for
the other. Tied scores advance the ROC as a single diagonal step, which makes
the trapezoid area agree with the half-credit rank statistic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import MetricError
from .grouping import GroupTag

__all__ = [
    "Prediction",
    "RocCurve",
    "ConfusionCounts",
    "F1Result",
    "roc_curve",
    "auc_trapezoid",
    "auc_rank",
    "confusion_counts",
    "f1_at_threshold",
    "curve_to_csv",
]


@dataclass(frozen=True)
class Prediction:
    """One scored instance; ``group`` is required only for fairness audits."""

    instance_id: str
    score: float
    label: int
    group: GroupTag | None = None

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):  # also rejects NaN
            raise MetricError(
                f"score must be a finite value in [0, 1], got {self.score!r}"
            )
        if self.label not in (0, 1):
            raise MetricError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]
    positives: int
    negatives: int

    def __post_init__(self):
        if self.positives < 1 or self.negatives < 1:
            raise MetricError("ROC curve requires both classes present")
        if len(self.points) < 2:
            raise MetricError("ROC curve needs at least two points")
        if self.points[0] != (0.0, 0.0) or self.points[-1] != (1.0, 1.0):
            raise MetricError("ROC curve must run from (0,0) to (1,1)")
        for (x0, y0), (x1, y1) in zip(self.points, self.points[1:]):
            if x1 < x0 or y1 < y0:
                raise MetricError("ROC coordinates must be non-decreasing")
        for x, y in self.points:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise MetricError("ROC coordinates must lie in [0, 1]")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise MetricError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class F1Result:
    precision: float
    recall: float
    f1: float
    counts: ConfusionCounts


def _split_counts(preds: Sequence[Prediction]) -> tuple[int, int]:
    pos = sum(1 for p in preds if p.label == 1)
    neg = len(preds) - pos
    if pos == 0 or neg == 0:
        raise MetricError("ROC undefined: input contains a single class")
    return pos, neg


def roc_curve(preds: Iterable[Prediction]) -> RocCurve:
    """Sweep the decision threshold across distinct scores, high to low.

    Tied scores are consumed as one step, producing a diagonal segment.
    """
    preds = list(preds)
    pos, neg = _split_counts(preds)
    ranked = sorted(preds, key=lambda p: p.score, reverse=True)
    points = [(0.0, 0.0)]
    tp = fp = 0
    i, n = 0, len(ranked)
    while i < n:
        j = i
        while j < n and ranked[j].score == ranked[i].score:
            if ranked[j].label == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / neg, tp / pos))
        i = j
    return RocCurve(points=tuple(points), positives=pos, negatives=neg)


def auc_trapezoid(curve: RocCurve) -> float:
    """Trapezoidal area under the piecewise-linear ROC curve."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(curve.points, curve.points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def auc_rank(preds: Iterable[Prediction]) -> float:
    """Rank-statistic AUC: (concordant + half the ties) / (P * N).

    Implemented with average ranks, so it never builds the ROC curve and
    stays an independent check on the geometric computation.
    """
    preds = list(preds)
    pos, neg = _split_counts(preds)
    n = len(preds)
    order = sorted(range(n), key=lambda i: preds[i].score)
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j < n and preds[order[j]].score == preds[order[i]].score:
            j += 1
        avg = (i + j + 1) / 2.0  # mean of one-based ranks i+1 .. j
        for k in range(i, j):
            ranks[order[k]] = avg
        i = j
    rank_sum = sum(ranks[k] for k in range(n) if preds[k].label == 1)
    u = rank_sum - pos * (pos + 1) / 2.0
    return u / (pos * neg)


def confusion_counts(preds: Iterable[Prediction], threshold: float) -> ConfusionCounts:
    """Counts at a hard threshold; predicted positive iff score >= threshold."""
    tp = fp = tn = fn = 0
    for p in preds:
        predicted = p.score >= threshold
        if p.label == 1:
            if predicted:
                tp += 1
            else:
                fn += 1
        else:
            if predicted:
                fp += 1
            else:
                tn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def f1_at_threshold(preds: Iterable[Prediction], threshold: float = 0.5) -> F1Result:
    """Precision, recall and F1 at a hard threshold; any 0/0 is 0 by convention."""
    counts = confusion_counts(list(preds), threshold)
    predicted_pos = counts.tp + counts.fp
    actual_pos = counts.tp + counts.fn
    precision = counts.tp / predicted_pos if predicted_pos else 0.0
    recall = counts.tp / actual_pos if actual_pos else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0.0
        else 0.0
    )
    return F1Result(precision=precision, recall=recall, f1=f1, counts=counts)


def curve_to_csv(curve: RocCurve) -> str:
    """Flat CSV (fpr, tpr rows) for external plotting; floats via repr."""
    lines = ["fpr,tpr"]
    lines.extend(f"{x!r},{y!r}" for x, y in curve.points)
    return "\n".join(lines) + "\n"
