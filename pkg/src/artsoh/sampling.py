"""SMOTE oversampling, random undersampling and the SaTAD dataset recipes."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# SaTAD majority sizes for a 47-sample minority; other minorities scale them
SATAD_MAJORITY = {1: 70, 2: 94, 3: None, 4: 147}
SATAD_MINORITY_N = {1: 100, 2: 100, 3: 100, 4: 200}
TAD_COUNTS = (47, 116)


@dataclass
class LabeledDataset:
    """Feature matrix with 0/1 labels and a per-sample synthetic flag."""

    X: np.ndarray
    y: np.ndarray
    synthetic: np.ndarray | None = None
    names: list[str] | None = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        self.y = np.asarray(self.y, dtype=np.int64).ravel()
        if self.X.shape[0] != self.y.size:
            raise ParameterError("X and y disagree in length")
        if not np.isin(self.y, (0, 1)).all():
            raise ParameterError("labels must be 0 or 1")
        if self.synthetic is None:
            self.synthetic = np.zeros(self.y.size, dtype=bool)
        self.synthetic = np.asarray(self.synthetic, dtype=bool)

    def __len__(self):
        return self.y.size

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def count(self, label: int) -> int:
        return int((self.y == label).sum())

    def subset(self, idx) -> "LabeledDataset":
        return LabeledDataset(self.X[idx], self.y[idx], self.synthetic[idx], self.names)

    def concat(self, other: "LabeledDataset") -> "LabeledDataset":
        return LabeledDataset(
            np.vstack([self.X, other.X]),
            np.concatenate([self.y, other.y]),
            np.concatenate([self.synthetic, other.synthetic]),
            self.names,
        )


@dataclass(frozen=True)
class SmoteStep:
    current: int
    neighbor: int
    r: float


def nearest_neighbors(X: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest rows of each row (self excluded).

    Euclidean distance on raw values; ties go to the lower index.
    """
    d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def smote(data: LabeledDataset, n_percent: int = 100, k: int = 5, target_label: int = 1,
          seed=None, mode: str = "away", return_trace: bool = False):
    """Append ``floor(n_percent / 100)`` synthetic samples per target sample.

    Each synthetic sample is ``F + r * (F - F_k)`` for the current sample F,
    one of its ``k`` nearest same-class neighbours F_k drawn uniformly and
    ``r ~ U[0, 1]``. ``mode="toward"`` uses the classic interpolation
    ``F + r * (F_k - F)`` instead.
    """
    if n_percent < 100:
        raise ParameterError("n_percent must be >= 100")
    if k < 1:
        raise ParameterError("k must be >= 1")
    if mode not in ("away", "toward"):
        raise ParameterError(f"unknown SMOTE mode {mode!r}")
    target = np.flatnonzero(data.y == target_label)
    if target.size < k + 1:
        raise ParameterError(f"need at least k+1={k + 1} samples of class {target_label}, have {target.size}")
    rng = np.random.default_rng(seed)
    per_sample = n_percent // 100
    Xt = data.X[target]
    nn = nearest_neighbors(Xt, k)
    new = np.empty((per_sample * target.size, data.n_features))
    trace = []
    row = 0
    for i in range(target.size):
        for _ in range(per_sample):
            j = nn[i, rng.integers(k)]
            r = rng.random()
            cur, nb = Xt[i], Xt[j]
            new[row] = cur + r * (cur - nb) if mode == "away" else cur + r * (nb - cur)
            trace.append(SmoteStep(int(target[i]), int(target[j]), float(r)))
            row += 1
    synth = LabeledDataset(new, np.full(row, target_label), np.ones(row, dtype=bool), data.names)
    out = data.concat(synth)
    return (out, trace) if return_trace else out


def random_undersample(data: LabeledDataset, target_label: int, target_count: int, seed=None) -> LabeledDataset:
    idx = np.flatnonzero(data.y == target_label)
    if not 0 <= target_count <= idx.size:
        raise ParameterError(f"cannot keep {target_count} of {idx.size} class-{target_label} samples")
    rng = np.random.default_rng(seed)
    kept = rng.choice(idx, size=target_count, replace=False)
    keep = np.ones(len(data), dtype=bool)
    keep[idx] = False
    keep[kept] = True
    return data.subset(np.flatnonzero(keep))


def _majority_target(variant: int, n_min: int, n_maj: int) -> int:
    base = SATAD_MAJORITY[variant]
    if base is None:
        return n_maj
    if (n_min, n_maj) == TAD_COUNTS:
        return base
    return int(round(base * n_min / TAD_COUNTS[0]))


def build_satad(tad: LabeledDataset, variant: int, seed=None, k: int = 5, mode: str = "away") -> LabeledDataset:
    """SMOTE-augmented variant 1..4 of a TAD-like dataset.

    With the 47/116 TAD counts the result has 94/70, 94/94, 94/116 and
    141/147 positives/negatives. The variant 4 majority is grown by
    oversampling it with SMOTE and keeping a random part of that pool.
    """
    if variant not in SATAD_MAJORITY:
        raise ParameterError("SaTAD variant must be 1, 2, 3 or 4")
    n_min, n_maj = tad.count(1), tad.count(0)
    if (n_min, n_maj) != TAD_COUNTS:
        warnings.warn(f"expected TAD counts {TAD_COUNTS}, got {(n_min, n_maj)}; majority targets are scaled",
                      stacklevel=2)
    seeds = np.random.SeedSequence(seed).spawn(3)
    out = smote(tad, SATAD_MINORITY_N[variant], k, 1, seeds[0], mode=mode)
    target = _majority_target(variant, n_min, n_maj)
    if target < n_maj:
        out = random_undersample(out, 0, target, seeds[1])
    elif target > n_maj:
        extra = target - n_maj
        grown = smote(tad.subset(np.flatnonzero(tad.y == 0)), 100, k, 0, seeds[1], mode=mode)
        pool = grown.subset(np.flatnonzero(grown.synthetic))
        if extra > len(pool):
            raise ParameterError("majority target exceeds one round of SMOTE")
        pick = np.sort(np.random.default_rng(seeds[2]).choice(len(pool), size=extra, replace=False))
        out = out.concat(pool.subset(pick))
    return out
