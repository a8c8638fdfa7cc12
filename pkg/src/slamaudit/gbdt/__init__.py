"""Gradient-boosted decision trees with logistic loss.

Second-order (Newton) boosting: each round fits a regression tree to the
gradients g = p - y and hessians h = p(1 - p) of the logistic loss, with
L2-regularized leaf values -G/(H + lambda) and the standard split gain
GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l). Splits are exact greedy over sorted
feature values; no histograms. Training is fully deterministic, so two runs
with the same data and config produce byte-identical models.

The inner split scan runs on a compiled kernel when available and on a numpy
fallback otherwise; the two are bit-identical by construction (see
_backend.py).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, TrainingError
from ..features import Vocabulary, encode, labels_array, to_dense
from ..numerics import log_loss_from_raw, sigmoid
from ..slam_format import Dataset, TokenInstance
from ._backend import active_backend, scan_splits

MODEL_FORMAT_VERSION = 1

__all__ = [
    "GbdtConfig",
    "SplitCandidate",
    "Tree",
    "GbdtModel",
    "best_split",
    "train_gbdt",
    "predict_gbdt",
    "predict_scores",
    "save_model",
    "load_model",
    "active_backend",
]


@dataclass(frozen=True)
class GbdtConfig:
    n_trees: int = 100
    max_depth: int = 6
    learning_rate: float = 0.1
    min_samples_leaf: int = 20
    l2_leaf_reg: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise TrainingError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise TrainingError("max_depth must be >= 1")
        # learning_rate 0 is allowed: it must leave predictions at the base rate
        if not (0.0 <= self.learning_rate <= 1.0):
            raise TrainingError("learning_rate must be in [0, 1]")
        if self.min_samples_leaf < 1:
            raise TrainingError("min_samples_leaf must be >= 1")
        if self.l2_leaf_reg < 0.0:
            raise TrainingError("l2_leaf_reg must be >= 0")

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "min_samples_leaf": self.min_samples_leaf,
            "l2_leaf_reg": self.l2_leaf_reg,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    gain: float


@dataclass(frozen=True)
class Tree:
    """Binary tree as parallel arrays; node 0 is the root.

    Internal nodes carry (feature, threshold, left, right); leaves carry a
    value and have feature == -1. Decision rule: go right iff value > threshold.
    """

    feature: tuple[int, ...]
    threshold: tuple[float, ...]
    left: tuple[int, ...]
    right: tuple[int, ...]
    value: tuple[float, ...]

    def __post_init__(self):
        n = len(self.feature)
        if not (len(self.threshold) == len(self.left) == len(self.right) == len(self.value) == n):
            raise TrainingError("tree arrays must have equal length")
        if n < 1:
            raise TrainingError("tree must have at least one node")
        for i in range(n):
            if self.feature[i] < 0:
                if not math.isfinite(self.value[i]):
                    raise TrainingError(f"leaf {i} has non-finite value")
            else:
                for child in (self.left[i], self.right[i]):
                    if not (i < child < n):
                        raise TrainingError(f"node {i} has invalid child {child}")

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f < 0)

    def depth(self) -> int:
        def walk(i: int) -> int:
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        """Leaf value for every row of X."""
        feature = np.asarray(self.feature, dtype=np.int64)
        threshold = np.asarray(self.threshold, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        value = np.asarray(self.value, dtype=np.float64)
        idx = np.zeros(len(X), dtype=np.int64)
        while True:
            f = feature[idx]
            pending = np.nonzero(f >= 0)[0]
            if pending.size == 0:
                break
            node = idx[pending]
            go_right = X[pending, f[pending]] > threshold[node]
            idx[pending] = np.where(go_right, right[node], left[node])
        return value[idx]

    def to_dict(self) -> dict:
        return {
            "feature": list(self.feature),
            "threshold": list(self.threshold),
            "left": list(self.left),
            "right": list(self.right),
            "value": list(self.value),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=tuple(d["feature"]),
            threshold=tuple(d["threshold"]),
            left=tuple(d["left"]),
            right=tuple(d["right"]),
            value=tuple(d["value"]),
        )


@dataclass(frozen=True)
class GbdtModel:
    config: GbdtConfig
    base_score: float
    trees: tuple[Tree, ...]
    vocab: Vocabulary
    train_losses: tuple[float, ...]

    def __post_init__(self):
        if len(self.trees) != self.config.n_trees:
            raise TrainingError(
                f"model has {len(self.trees)} trees, config says {self.config.n_trees}"
            )
        if not math.isfinite(self.base_score):
            raise TrainingError("base_score must be finite")

    def predict_raw(self, X: np.ndarray) -> np.ndarray:
        raw = np.full(len(X), self.base_score, dtype=np.float64)
        for tree in self.trees:
            raw += self.config.learning_rate * tree.predict_batch(X)
        return raw

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.predict_raw(X))


def best_split(
    X: np.ndarray,
    feature: int,
    gradients: np.ndarray,
    hessians: np.ndarray,
    config: GbdtConfig,
) -> SplitCandidate | None:
    """Best threshold for one feature, or None without a positive-gain split.

    Denominators must stay positive: either l2_leaf_reg > 0 or strictly
    positive hessians (the trainer guarantees the latter).
    """
    column = np.ascontiguousarray(X[:, feature], dtype=np.float64)
    if column.size == 0:
        raise TrainingError("cannot split an empty sample set")
    order = np.argsort(column, kind="stable")
    vals = column[order][None, :]
    g = np.ascontiguousarray(gradients, dtype=np.float64)[order][None, :]
    h = np.ascontiguousarray(hessians, dtype=np.float64)[order][None, :]
    f, pos, gain = scan_splits(
        np.ascontiguousarray(vals), np.ascontiguousarray(g), np.ascontiguousarray(h),
        config.l2_leaf_reg, config.min_samples_leaf,
    )
    if f < 0:
        return None
    return SplitCandidate(
        feature=feature, threshold=_cut_threshold(vals[0], pos), gain=gain
    )


def _cut_threshold(sorted_vals: np.ndarray, pos: int) -> float:
    lo = float(sorted_vals[pos])
    hi = float(sorted_vals[pos + 1])
    thr = (lo + hi) / 2.0
    if thr >= hi:  # adjacent floats: keep the cut between pos and pos+1 exact
        thr = lo
    return thr


class _TreeBuilder:
    """Grows one tree on fixed gradients/hessians.

    Each node carries `cols`, an (F, k) array whose row f lists the node's
    member row ids sorted by feature f; children inherit filtered copies of
    the parent's rows, so per-feature sort order is established once per
    tree and never recomputed. `vals` is X gathered the same way. The
    partition after a split is taken directly from the winning feature's
    sorted slice, which keeps it exactly consistent with the positions the
    scan counted (and with the serialized `value > threshold` rule).
    """

    def __init__(self, X, g, h, config):
        self.X = X
        self.g = g
        self.h = h
        self.config = config
        self.n = len(X)
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.contrib = np.zeros(self.n, dtype=np.float64)

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _leaf(self, node: int, rows: np.ndarray):
        lam = self.config.l2_leaf_reg
        value = -self.g[rows].sum() / (self.h[rows].sum() + lam)
        self.value[node] = value
        self.contrib[rows] = value

    def build(self, cols: np.ndarray, vals: np.ndarray, depth: int) -> int:
        node = self._new_node()
        F, k = cols.shape
        cfg = self.config
        if depth >= cfg.max_depth or k < 2 * cfg.min_samples_leaf:
            self._leaf(node, cols[0])
            return node
        f, pos, _gain = scan_splits(
            vals,
            np.ascontiguousarray(self.g[cols]),
            np.ascontiguousarray(self.h[cols]),
            cfg.l2_leaf_reg,
            cfg.min_samples_leaf,
        )
        if f < 0:
            self._leaf(node, cols[0])
            return node
        thr = _cut_threshold(vals[f], pos)
        go_right = np.zeros(self.n, dtype=bool)
        go_right[cols[f, pos + 1 :]] = True
        sel = go_right[cols]
        k_right = k - (pos + 1)
        right_cols = cols[sel].reshape(F, k_right)
        left_cols = cols[~sel].reshape(F, k - k_right)
        right_vals = vals[sel].reshape(F, k_right)
        left_vals = vals[~sel].reshape(F, k - k_right)
        self.feature[node] = int(f)
        self.threshold[node] = thr
        self.left[node] = self.build(left_cols, left_vals, depth + 1)
        self.right[node] = self.build(right_cols, right_vals, depth + 1)
        return node

    def tree(self) -> Tree:
        return Tree(
            feature=tuple(self.feature),
            threshold=tuple(self.threshold),
            left=tuple(self.left),
            right=tuple(self.right),
            value=tuple(self.value),
        )


def train_gbdt(train: Dataset, vocab: Vocabulary, config: GbdtConfig) -> GbdtModel:
    """Fit the boosted ensemble; raises if training loss ever increases.

    Training is deterministic: exact greedy splits involve no sampling, and
    the recorded seed only documents the run.
    """
    y = labels_array(train)
    X = to_dense((encode(i, vocab) for i in train.instances), vocab)
    return _train_on_matrix(X, y, vocab, config)


def _train_on_matrix(
    X: np.ndarray, y: np.ndarray, vocab: Vocabulary, config: GbdtConfig
) -> GbdtModel:
    n = len(y)
    positives = float(y.sum())
    if n < 2 or positives == 0.0 or positives == float(n):
        raise TrainingError("training data must contain both classes")
    base = math.log(positives / (n - positives))

    root_cols = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T)
    root_vals = np.ascontiguousarray(np.take_along_axis(X.T, root_cols, axis=1))
    raw = np.full(n, base, dtype=np.float64)
    losses = [log_loss_from_raw(raw, y)]
    trees = []
    for _round in range(config.n_trees):
        p = sigmoid(raw)
        g = p - y
        h = p * (1.0 - p)
        builder = _TreeBuilder(X, g, h, config)
        builder.build(root_cols, root_vals, 0)
        trees.append(builder.tree())
        raw = raw + config.learning_rate * builder.contrib
        loss = log_loss_from_raw(raw, y)
        if loss > losses[-1] + 1e-12:
            raise TrainingError(
                f"training loss increased at round {len(trees)}: "
                f"{losses[-1]!r} -> {loss!r}"
            )
        losses.append(loss)
    return GbdtModel(
        config=config,
        base_score=base,
        trees=tuple(trees),
        vocab=vocab,
        train_losses=tuple(losses),
    )


def predict_gbdt(model: GbdtModel, instance: TokenInstance) -> float:
    """Mistake probability for one token instance, strictly inside (0, 1)."""
    fv = encode(instance, model.vocab)
    X = to_dense([fv], model.vocab)
    return float(model.predict_proba(X)[0])


def predict_scores(model: GbdtModel, dataset: Dataset) -> np.ndarray:
    """Vectorized probabilities for every instance in the dataset."""
    X = to_dense((encode(i, model.vocab) for i in dataset.instances), model.vocab)
    return model.predict_proba(X)


def save_model(model: GbdtModel, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "gbdt",
        "config": model.config.to_dict(),
        "base_score": model.base_score,
        "train_losses": list(model.train_losses),
        "vocab": model.vocab.to_dict(),
        "trees": [t.to_dict() for t in model.trees],
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> GbdtModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    if payload.get("kind") != "gbdt":
        raise DataError(f"not a gbdt model file: {path}")
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise DataError(
            f"unsupported model format version {payload.get('format_version')!r}"
        )
    return GbdtModel(
        config=GbdtConfig(**payload["config"]),
        base_score=payload["base_score"],
        trees=tuple(Tree.from_dict(d) for d in payload["trees"]),
        vocab=Vocabulary.from_dict(payload["vocab"]),
        train_losses=tuple(payload["train_losses"]),
    )
