"""Brute-force reference implementations used to cross-check the library.

Everything here favours obviousness over speed: exhaustive threshold sweeps,
quadratic pair counting, dense-grid quadrature. Keep these independent of the
library internals so agreement means something.
"""

from __future__ import annotations

import numpy as np


def oracle_roc_points(scores, labels):
    """ROC by exhaustively evaluating every distinct threshold.

    Predicted positive iff score >= threshold; one point per distinct score,
    swept high to low, prefixed with (0, 0).
    """
    pos = sum(1 for y in labels if y == 1)
    neg = len(labels) - pos
    assert pos > 0 and neg > 0
    points = [(0.0, 0.0)]
    for t in sorted(set(scores), reverse=True):
        tp = sum(1 for s, y in zip(scores, labels) if s >= t and y == 1)
        fp = sum(1 for s, y in zip(scores, labels) if s >= t and y == 0)
        points.append((fp / neg, tp / pos))
    return points


def oracle_auc_pairs(scores, labels):
    """AUC by quadratic positive/negative pair counting with half-credit ties."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    assert pos and neg
    credit = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                credit += 1.0
            elif p == q:
                credit += 0.5
    return credit / (len(pos) * len(neg))


def oracle_interp(points, x):
    """Evaluate a piecewise-linear ROC at one FPR by scanning segments.

    At an FPR where the curve jumps vertically, returns the supremum (the
    highest TPR recorded at that FPR).
    """
    hits = [py for px, py in points if px == x]
    if hits:
        return max(hits)
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if x0 < x < x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    raise AssertionError(f"{x} not covered by curve")


def oracle_curve_area_between(points_a, points_b, step=1e-5):
    """Midpoint-rule estimate of the area between two piecewise-linear curves.

    Midpoints of a uniform grid never coincide with curve breakpoints in
    practice, so plain linear interpolation (numpy) is well defined; jumps
    contribute nothing to the integral.
    """
    n = int(round(1.0 / step))
    mid = (np.arange(n, dtype=np.float64) + 0.5) * step
    xa = np.array([p[0] for p in points_a])
    ya = np.array([p[1] for p in points_a])
    xb = np.array([p[0] for p in points_b])
    yb = np.array([p[1] for p in points_b])
    diff = np.abs(np.interp(mid, xa, ya) - np.interp(mid, xb, yb))
    return float(diff.sum() * step)
