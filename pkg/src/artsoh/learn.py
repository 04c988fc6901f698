"""Random forest and cost-sensitive RBF SVM classifiers, plus model files.

Both models expose ``score(X)`` (higher means more Artcode-like, in [0, 1])
and ``predict(X)``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from . import kernels
from .errors import ParameterError, TrainingError

MODEL_FORMAT_VERSION = 1
DEFAULT_COST = ((0.0, 1.0), (3.0, 0.0))


def _check_training(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64).ravel()
    if X.ndim != 2 or X.shape[0] != y.size or y.size == 0:
        raise TrainingError("training data must be a nonempty (n, d) matrix with n labels")
    if not np.isin(y, (0, 1)).all():
        raise TrainingError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise TrainingError("training data must contain both classes")
    return X, y


def _check_features(X, n_features):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != n_features:
        raise ParameterError(f"model expects {n_features} features, got {X.shape[1]}")
    return X


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    count0: np.ndarray
    count1: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def leaf_index(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            cur = node[rows]
            go_left = X[rows, self.feature[cur]] <= self.threshold[cur]
            node[rows] = np.where(go_left, self.left[cur], self.right[cur])
            active = self.feature[node] >= 0
        return node

    def vote(self, X: np.ndarray) -> np.ndarray:
        """Majority class of the reached leaf; a tied leaf votes 1."""
        leaf = self.leaf_index(X)
        return (self.count1[leaf] >= self.count0[leaf]).astype(np.int64)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in
                ("feature", "threshold", "left", "right", "count0", "count1")}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            np.array(d["feature"], dtype=np.int64), np.array(d["threshold"], dtype=np.float64),
            np.array(d["left"], dtype=np.int64), np.array(d["right"], dtype=np.int64),
            np.array(d["count0"], dtype=np.int64), np.array(d["count1"], dtype=np.int64),
        )


@dataclass
class ForestModel:
    trees: list[Tree]
    n_features: int
    max_features: int
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    kind = "forest"

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def score(self, X) -> np.ndarray:
        """Fraction of trees voting Artcode."""
        X = _check_features(X, self.n_features)
        votes = np.zeros(X.shape[0])
        for t in self.trees:
            votes += t.vote(X)
        return votes / self.n_trees

    def predict(self, X) -> np.ndarray:
        return (self.score(X) >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "max_features": self.max_features,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls([Tree.from_dict(t) for t in d["trees"]], d["n_features"], d["max_features"], d.get("seed"))


def train_tree(X, y, samples, max_features, rng) -> Tree:
    n_rand = max(64, 2 * len(samples) * X.shape[1])
    rand = rng.integers(0, 2**32, size=n_rand, dtype=np.uint32)
    return Tree(*kernels.grow_tree(X, y, np.asarray(samples, dtype=np.int64), int(max_features), rand))


def train_forest(X, y, n_trees: int = 80, seed=None, max_features: int | None = None) -> ForestModel:
    """Bagged unpruned Gini trees with ``floor(sqrt(d))`` features per split.

    Every tree gets its own RNG stream spawned from ``seed`` (an int or a
    ``numpy.random.SeedSequence``).
    """
    X, y = _check_training(X, y)
    if n_trees < 1:
        raise ParameterError("n_trees must be >= 1")
    n, d = X.shape
    if max_features is None:
        max_features = max(1, int(math.isqrt(d)))
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = root.spawn(n_trees)
    trees = []
    for ss in streams:
        rng = np.random.default_rng(ss)
        boot = rng.integers(0, n, size=n)
        trees.append(train_tree(X, y, boot, max_features, rng))
    return ForestModel(trees, d, max_features, seed if isinstance(seed, int) else None)


def rbf_kernel(x, y, gamma: float = 1.0):
    """exp(-gamma * ||x - y||^2); matrices give the pairwise Gram matrix."""
    if gamma <= 0:
        raise ParameterError("gamma must be positive")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1 and y.ndim == 1:
        if x.shape != y.shape:
            raise ParameterError("vectors differ in length")
        return float(np.exp(-gamma * np.sum((x - y) ** 2)))
    x = np.atleast_2d(x)
    y = np.atleast_2d(y)
    return np.exp(-gamma * cdist(x, y, "sqeuclidean"))


def _logistic(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=np.float64)))


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    gamma: float
    C: float
    cost: tuple
    converged: bool = True
    n_iter: int = 0
    meta: dict = field(default_factory=dict)

    kind = "svm"

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision(self, X) -> np.ndarray:
        X = _check_features(X, self.n_features)
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias

    def score(self, X) -> np.ndarray:
        return _logistic(self.decision(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision(X) >= 0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
            "C": self.C,
            "cost": [list(r) for r in self.cost],
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        sv = np.array(d["support_vectors"], dtype=np.float64).reshape(len(d["dual_coef"]), d["n_features"])
        return cls(sv,
                   np.array(d["dual_coef"], dtype=np.float64), float(d["bias"]), float(d["gamma"]),
                   float(d["C"]), tuple(tuple(r) for r in d["cost"]), bool(d["converged"]), int(d["n_iter"]))


def train_svm(X, y, gamma: float = 1.0, C: float = 1.0, cost=DEFAULT_COST,
              tol: float = 1e-3, max_passes: int = 10) -> SvmModel:
    """Soft-margin RBF SVM trained by SMO with class-dependent box bounds.

    ``cost[i][j]`` is the cost of predicting class j for true class i; the
    box bound of class 1 samples is ``C * cost[1][0]`` and of class 0
    samples ``C * cost[0][1]``. Iteration stops when the maximal KKT
    violation drops below ``tol`` or after ``max_passes * n`` sweeps of
    ``n`` pair updates each.
    """
    X, y = _check_training(X, y)
    cost = tuple(tuple(float(v) for v in r) for r in cost)
    if len(cost) != 2 or any(len(r) != 2 for r in cost) or min(min(r) for r in cost) < 0:
        raise ParameterError("cost must be a 2x2 nonnegative matrix")
    c_pos, c_neg = C * cost[1][0], C * cost[0][1]
    if c_pos <= 0 or c_neg <= 0:
        raise ParameterError("misclassification costs must give positive box bounds")
    n = y.size
    ys = np.where(y == 1, 1.0, -1.0)
    K = rbf_kernel(X, X, gamma)
    Q = np.ascontiguousarray(ys[:, None] * ys[None, :] * K)
    box = np.where(y == 1, c_pos, c_neg)
    alpha, G, n_iter, converged = kernels.smo_solve(Q, ys, box, float(tol), int(max_passes) * n * n)
    if not converged:
        warnings.warn(f"SMO stopped after {n_iter} iterations without meeting tol={tol}", stacklevel=2)
    bias = -_rho(alpha, G, ys, box)
    sv = alpha > 0
    return SvmModel(X[sv].copy(), (alpha * ys)[sv], bias, float(gamma), float(C), cost, bool(converged), int(n_iter),
                    meta={"alpha": alpha})


def _rho(alpha, G, ys, box):
    yG = ys * G
    upper = alpha >= box
    lower = alpha <= 0
    free = ~(upper | lower)
    if free.any():
        return float(yG[free].mean())
    ub_mask = (upper & (ys < 0)) | (lower & (ys > 0))
    lb_mask = (upper & (ys > 0)) | (lower & (ys < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2)


def save_model(model, path, extra: dict | None = None) -> None:
    """Write ``model`` as JSON; ``extra`` holds run metadata (variant, config)."""
    doc = {"format_version": MODEL_FORMAT_VERSION, "model": model.to_dict(), "meta": extra or {}}
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True)


def load_model(path):
    """Read a model file; returns ``(model, meta)``."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ParameterError(f"{path}: unsupported model format {doc.get('format_version')!r}")
    d = doc["model"]
    kinds = {"forest": ForestModel, "svm": SvmModel}
    if d.get("kind") not in kinds:
        raise ParameterError(f"{path}: unknown model kind {d.get('kind')!r}")
    return kinds[d["kind"]].from_dict(d), doc.get("meta", {})
