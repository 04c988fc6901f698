"""Classification metrics, ROC/PR curves and repeated stratified cross-validation."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import learn, sampling
from .errors import CurveError, ParameterError

METRIC_NAMES = ("accuracy", "precision", "recall", "tnr", "f2", "mcc")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


def confusion(predicted, actual) -> ConfusionMatrix:
    p = np.asarray(predicted, dtype=np.int64).ravel()
    a = np.asarray(actual, dtype=np.int64).ravel()
    if p.size != a.size:
        raise ParameterError("predicted and actual labels differ in length")
    return ConfusionMatrix(
        tp=int(((p == 1) & (a == 1)).sum()),
        fp=int(((p == 1) & (a == 0)).sum()),
        fn=int(((p == 0) & (a == 1)).sum()),
        tn=int(((p == 0) & (a == 0)).sum()),
    )


@dataclass(frozen=True)
class MetricsReport:
    """Metric values; entries in ``undefined`` had a zero denominator.

    Undefined metrics hold NaN, except MCC which is set to 0.
    """

    accuracy: float
    precision: float
    recall: float
    tnr: float
    f2: float
    mcc: float
    undefined: frozenset = frozenset()

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_NAMES}


def _ratio(num, den):
    return (num / den, False) if den else (math.nan, True)


def f_beta(precision: float, recall: float, beta: float = 2.0) -> float:
    """(1 + b^2) P R / (b^2 P + R); NaN when the denominator is zero."""
    den = beta * beta * precision + recall
    if not den or math.isnan(den):
        return math.nan
    return (1 + beta * beta) * precision * recall / den


def metrics(cm: ConfusionMatrix, beta: float = 2.0) -> MetricsReport:
    undefined = set()
    recall, u = _ratio(cm.tp, cm.tp + cm.fn)
    if u:
        undefined.add("recall")
    precision, u = _ratio(cm.tp, cm.tp + cm.fp)
    if u:
        undefined.add("precision")
    tnr, u = _ratio(cm.tn, cm.tn + cm.fp)
    if u:
        undefined.add("tnr")
    accuracy, u = _ratio(cm.tp + cm.tn, cm.total)
    if u:
        undefined.add("accuracy")
    fb = f_beta(precision, recall, beta)
    if math.isnan(fb):
        undefined.add("f2")
    den = math.sqrt(float(cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn))
    if den:
        mcc = (cm.tp * cm.tn - cm.fp * cm.fn) / den
    else:
        mcc = 0.0
        undefined.add("mcc")
    return MetricsReport(accuracy, precision, recall, tnr, fb, mcc, frozenset(undefined))


@dataclass
class CurveData:
    kind: str
    points: np.ndarray  # (m, 2): (FPR, TPR) or (recall, precision)
    auc: float
    thresholds: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "auc": self.auc, "points": self.points.tolist()}


def _trapezoid(x, y) -> float:
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def roc_pr(scores, labels) -> tuple[CurveData, CurveData]:
    """ROC and PR curves sweeping every distinct score as a threshold.

    Tied scores enter together, so a tie block is one diagonal ROC segment
    and the trapezoidal ROC-AUC equals the Mann-Whitney statistic. The PR
    curve starts at recall 0 with the precision of the highest threshold.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    t = np.asarray(labels, dtype=np.int64).ravel()
    if s.size != t.size:
        raise CurveError("scores and labels differ in length")
    n_pos = int((t == 1).sum())
    n_neg = int((t == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise CurveError("ROC/PR curves need both classes")
    order = np.argsort(-s, kind="stable")
    s, t = s[order], t[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tp = np.cumsum(t)[last].astype(np.float64)
    fp = (last + 1) - tp
    thr = s[last]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    roc = CurveData("ROC", np.column_stack([fpr, tpr]), _trapezoid(fpr, tpr), np.r_[np.inf, thr])
    rec = tp / n_pos
    prec = tp / (tp + fp)
    rec = np.r_[0.0, rec]
    prec = np.r_[prec[0], prec]
    pr = CurveData("PR", np.column_stack([rec, prec]), _trapezoid(rec, prec), np.r_[np.inf, thr])
    return roc, pr


@dataclass
class ModelSpec:
    kind: str = "forest"
    n_trees: int = 80
    gamma: float = 1.0
    C: float = 1.0
    cost: tuple = learn.DEFAULT_COST

    def train(self, X, y, seed=None):
        if self.kind == "forest":
            return learn.train_forest(X, y, self.n_trees, seed=seed)
        if self.kind == "svm":
            return learn.train_svm(X, y, gamma=self.gamma, C=self.C, cost=self.cost)
        raise ParameterError(f"unknown model kind {self.kind!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cost"] = [list(r) for r in self.cost]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        d = dict(d)
        if "cost" in d:
            d["cost"] = tuple(tuple(r) for r in d["cost"])
        return cls(**d)


@dataclass
class CvConfig:
    folds: int = 5
    repeats: int = 10
    seed: int = 0
    stratified: bool = True
    smote_inside_folds: bool = False
    smote_n: int = 100
    smote_k: int = 5

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CvConfig":
        return cls(**d)


@dataclass
class CvResult:
    mean: dict
    std: dict
    folds: list
    roc: CurveData
    pr: CurveData
    repeat_auc: list
    elapsed_seconds: float
    n_models: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "roc_auc": self.roc.auc,
            "pr_auc": self.pr.auc,
            "repeat_auc": self.repeat_auc,
            "elapsed_seconds": self.elapsed_seconds,
            "n_models": self.n_models,
            "folds": self.folds,
            **self.extra,
        }


def canonical_order(X, y) -> np.ndarray:
    """A total order over samples that depends only on their content."""
    keys = np.column_stack([np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64)])
    return np.lexsort(keys.T[::-1])


def assign_folds(X, y, k: int, rng, stratified: bool = True) -> np.ndarray:
    """Fold id per sample.

    Samples are put in canonical order, shuffled within each class, laid
    out class by class and dealt round-robin into ``k`` folds, so the
    partition depends on sample content and the seed but not input order.
    """
    y = np.asarray(y)
    n = y.size
    if k < 2 or k > n:
        raise ParameterError(f"cannot split {n} samples into {k} folds")
    canon = canonical_order(X, y)
    if stratified:
        parts = []
        for c in (1, 0):
            members = canon[y[canon] == c]
            parts.append(members[rng.permutation(members.size)])
        layout = np.concatenate(parts)
    else:
        layout = canon[rng.permutation(n)]
    fold = np.empty(n, dtype=np.int64)
    fold[layout] = np.arange(n) % k
    return fold


def _fold_stat(values, fn):
    v = np.asarray(values, dtype=np.float64)
    v = v[~np.isnan(v)]
    return float(fn(v)) if v.size else math.nan


def cross_validate(X, y, spec: ModelSpec | None = None, cfg: CvConfig | None = None) -> CvResult:
    """Repeated (stratified) k-fold CV.

    Metrics are computed per test fold and averaged over every fold of
    every repeat (undefined fold values are skipped). Curves use the pooled
    out-of-fold scores of all repeats.
    """
    spec = spec or ModelSpec()
    cfg = cfg or CvConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if cfg.repeats < 1:
        raise ParameterError("repeats must be >= 1")
    rank = np.empty(y.size, dtype=np.int64)
    rank[canonical_order(X, y)] = np.arange(y.size)
    fold_rows, pooled_s, pooled_y, repeat_auc = [], [], [], []
    n_models = 0
    t0 = time.perf_counter()
    for r, rs in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.repeats)):
        fold_seq, model_seq = rs.spawn(2)
        fold = assign_folds(X, y, cfg.folds, np.random.default_rng(fold_seq), cfg.stratified)
        rep_scores = np.empty(y.size)
        for f, ms in enumerate(model_seq.spawn(cfg.folds)):
            test = np.flatnonzero(fold == f)
            train = np.flatnonzero(fold != f)
            test = test[np.argsort(rank[test])]
            train = train[np.argsort(rank[train])]
            if np.unique(y[train]).size < 2:
                raise ParameterError(f"fold {f} leaves a single class for training")
            Xtr, ytr = X[train], y[train]
            smote_seed, train_seed = ms.spawn(2)
            if cfg.smote_inside_folds:
                aug = sampling.smote(sampling.LabeledDataset(Xtr, ytr), cfg.smote_n, cfg.smote_k, 1, smote_seed)
                Xtr, ytr = aug.X, aug.y
            model = spec.train(Xtr, ytr, seed=train_seed)
            n_models += 1
            s = model.score(X[test])
            pred = model.predict(X[test])
            rep_scores[test] = s
            cm = confusion(pred, y[test])
            m = metrics(cm)
            fold_rows.append({"repeat": r, "fold": f, "n_test": int(test.size), **asdict(cm),
                              **m.as_dict(), "undefined": sorted(m.undefined)})
        pooled_s.append(rep_scores)
        pooled_y.append(y)
        try:
            roc_r, pr_r = roc_pr(rep_scores, y)
            repeat_auc.append({"repeat": r, "roc_auc": roc_r.auc, "pr_auc": pr_r.auc})
        except CurveError:
            pass
    elapsed = time.perf_counter() - t0
    mean = {k: _fold_stat([row[k] for row in fold_rows], np.mean) for k in METRIC_NAMES}
    std = {k: _fold_stat([row[k] for row in fold_rows], np.std) for k in METRIC_NAMES}
    roc, pr = roc_pr(np.concatenate(pooled_s), np.concatenate(pooled_y))
    return CvResult(mean, std, fold_rows, roc, pr, repeat_auc, elapsed, n_models)


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def write_json_report(path, report: dict) -> None:
    """JSON with NaN/inf written as null."""
    with open(path, "w") as fh:
        json.dump(_clean(report), fh, indent=2, sort_keys=True)


def write_curve_csv(path, curve: CurveData) -> None:
    header = ("fpr", "tpr") if curve.kind == "ROC" else ("recall", "precision")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for x, yv in curve.points:
            w.writerow([repr(float(x)), repr(float(yv))])


def plot_curves(path, curves: dict, kind: str) -> None:
    """Overlay curves of one kind (label -> CurveData) into an SVG file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "artsoh"  # stable element ids

    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for label, c in curves.items():
        ax.plot(c.points[:, 0], c.points[:, 1], label=f"{label} (AUC={c.auc:.4f})")
    if kind == "ROC":
        ax.plot([0, 1], [0, 1], color="0.6", lw=0.8, ls="--")
        ax.set_xlabel("False positive rate")
        ax.set_ylabel("True positive rate")
    else:
        ax.set_xlabel("Recall")
        ax.set_ylabel("Precision")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
