"""Shared numeric helpers for the two learners."""

from __future__ import annotations

import numpy as np


def sigmoid(z):
    """Numerically stable logistic function; never returns exactly 0 or 1
    for finite input of reasonable magnitude."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_loss_from_raw(raw, y) -> float:
    """Mean logistic loss from raw (pre-sigmoid) scores.

    softplus(raw) - y*raw, with softplus evaluated stably, so no probability
    clipping is ever needed.
    """
    raw = np.asarray(raw, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    softplus = np.maximum(raw, 0.0) + np.log1p(np.exp(-np.abs(raw)))
    return float(np.mean(softplus - y * raw))
