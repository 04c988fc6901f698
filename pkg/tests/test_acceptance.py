"""Acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]``/``[SKIP]`` line which the
terminal summary collects under "acceptance criteria". Criteria 2-4 need
the public TAD images; point ``ARTSOH_TAD_ROOT`` at a directory with
``artcode/`` and ``non-artcode/`` subfolders to run them.
"""
import time

import numpy as np
import pytest

from artsoh import evaluation as ev
from artsoh import learn, pipeline, sampling, soh, synthetic
from artsoh.soh import CurveHalf

import conftest
from oracles import auc_pairs, on_away_segment


def record(n: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def skip(n: int, reason: str) -> None:
    line = f"[SKIP] criterion {n}: {reason}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    pytest.skip(reason)


@pytest.fixture(scope="module")
def tad_features():
    root = conftest.tad_root()
    if root is None:
        return None
    ds = pipeline.load_dataset(root, "tad")
    X, y, _ = pipeline.extract_features(ds, "SOH-07")
    return X, y


def satad4(tad_features):
    X, y = tad_features
    return sampling.build_satad(sampling.LabeledDataset(X, y), 4, seed=0)


# precision, recall, F2 of the nine reference comparison rows
REPORTED_ROWS = {
    "BoW-10": (0.572725, 0.665333, 0.644402),
    "BoW-100": (0.611765, 0.693333, 0.675325),
    "HoG-64x128": (0.70206, 0.482667, 0.514407),
    "HoG-128x128": (0.688081, 0.453333, 0.486334),
    "SOH-05": (0.420108, 0.817333, 0.687018),
    "SOH-07": (0.461529, 0.869333, 0.738419),
    "SOH-08": (0.45229, 0.784, 0.683404),
    "SOH-10": (0.531017, 0.813333, 0.734614),
    "SOH-12": (0.544111, 0.772, 0.712252),
}
NTREES_ROC_AUC_20 = 0.9133
NTREES_ROC_AUC_40_MIN = 0.9231


def test_criterion_1_f2_cross_check():
    t0 = time.perf_counter()
    errors = {k: abs(ev.f_beta(p, r) - f2) for k, (p, r, f2) in REPORTED_ROWS.items()}
    elapsed = time.perf_counter() - t0
    worst = max(errors, key=errors.get)
    ok = errors[worst] <= 0.002 and elapsed < 1.0
    record(1, ok, f"9 rows, max |F2 - reported| = {errors[worst]:.2e} ({worst}), {elapsed * 1e3:.2f} ms")


def test_criterion_2_tad_svm(tad_features):
    if tad_features is None:
        skip(2, "TAD images unavailable (set ARTSOH_TAD_ROOT)")
    X, y = tad_features
    spec = ev.ModelSpec(kind="svm", gamma=1.0)
    res = ev.cross_validate(X, y, spec, ev.CvConfig(folds=5, repeats=10, seed=0))
    rec, f2 = res.mean["recall"], res.mean["f2"]
    ok = (int(y.sum()), int((y == 0).sum())) == (47, 116) and rec >= 0.78 and f2 >= 0.65 \
        and res.elapsed_seconds < 120
    record(2, ok, f"recall {rec:.4f} (>= 0.78), F2 {f2:.4f} (>= 0.65), {res.elapsed_seconds:.1f} s")


def test_criterion_3_satad4_forest(tad_features):
    if tad_features is None:
        skip(3, "TAD images unavailable (set ARTSOH_TAD_ROOT)")
    t0 = time.perf_counter()
    data = satad4(tad_features)
    res = ev.cross_validate(data.X, data.y, ev.ModelSpec(n_trees=80), ev.CvConfig(folds=5, repeats=50, seed=0))
    elapsed = time.perf_counter() - t0
    m = res.mean
    checks = {
        "counts": (data.count(1), data.count(0)) == (141, 147),
        "accuracy": 0.78 <= m["accuracy"] <= 0.90,
        "recall": 0.76 <= m["recall"] <= 0.88,
        "mcc": 0.58 <= m["mcc"] <= 0.78,
        "roc_auc": 0.88 <= res.roc.auc <= 0.97,
        "pr_auc": 0.84 <= res.pr.auc <= 0.95,
        "runtime": elapsed < 600,
    }
    failed = [k for k, v in checks.items() if not v]
    record(3, not failed,
           f"{data.count(1)}/{data.count(0)}, acc {m['accuracy']:.4f}, recall {m['recall']:.4f}, "
           f"MCC {m['mcc']:.4f}, ROC-AUC {res.roc.auc:.4f}, PR-AUC {res.pr.auc:.4f}, {elapsed:.0f} s"
           + (f"; out of range: {', '.join(failed)}" if failed else ""))


def test_criterion_4_ntrees_stability(tad_features):
    if tad_features is None:
        skip(4, "TAD images unavailable (set ARTSOH_TAD_ROOT)")
    data = satad4(tad_features)
    cfg = ev.CvConfig(folds=5, repeats=50, seed=0)
    results = {n: ev.cross_validate(data.X, data.y, ev.ModelSpec(n_trees=n), cfg) for n in range(20, 201, 20)}
    acc = [results[n].mean["accuracy"] for n in range(40, 201, 20)]
    spread = max(acc) - min(acc)
    auc20 = results[20].roc.auc
    auc_rest = float(np.mean([results[n].roc.auc for n in range(40, 201, 20)]))
    ok = spread < 0.05 and auc20 < auc_rest
    record(4, ok, f"accuracy spread over 40..200 = {spread:.4f} (< 0.05), ROC-AUC(20) {auc20:.4f} "
                  f"vs mean ROC-AUC(>=40) {auc_rest:.4f} (reference {NTREES_ROC_AUC_20} vs >= {NTREES_ROC_AUC_40_MIN})")


def test_criterion_5_auc_oracle():
    rng = np.random.default_rng(5)
    worst, done = 0.0, 0
    while done < 1000:
        n = int(rng.integers(2, 21))
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            continue
        # coarse score grid forces many ties
        scores = rng.integers(0, int(rng.integers(2, 12)), n) / 10.0
        roc, _ = ev.roc_pr(scores, labels)
        worst = max(worst, abs(roc.auc - auc_pairs(scores, labels)))
        done += 1
    record(5, worst <= 1e-9, f"1000 instances (n <= 20), max |trapezoid - pair count| = {worst:.1e}")


def test_criterion_6_smote_properties():
    rng = np.random.default_rng(6)
    count_ok = replay_ok = True
    for _ in range(30):
        n_pos = int(rng.integers(6, 15))
        n_percent = int(rng.integers(100, 550))
        X = rng.normal(size=(n_pos + 10, 3))
        y = np.r_[np.ones(n_pos, int), np.zeros(10, int)]
        out, trace = sampling.smote(sampling.LabeledDataset(X, y), n_percent, 5, 1,
                                    seed=int(rng.integers(1 << 31)), return_trace=True)
        new = out.X[out.synthetic]
        count_ok &= new.shape[0] == (n_percent // 100) * n_pos
        for row, step in zip(new, trace):
            f, g = X[step.current], X[step.neighbor]
            replay_ok &= 0.0 <= step.r <= 1.0 and np.allclose(row, f + step.r * (f - g), rtol=0, atol=1e-12)
        # independent check without the trace
        replay_ok &= all(on_away_segment(row, X[:n_pos]) for row in new[:5])
    tad = sampling.LabeledDataset(rng.normal(size=(163, 7)), np.r_[np.ones(47, int), np.zeros(116, int)])
    got = {v: (d.count(1), d.count(0)) for v in (1, 2, 3, 4) for d in [sampling.build_satad(tad, v, seed=v)]}
    expected = {1: (94, 70), 2: (94, 94), 3: (94, 116), 4: (141, 147)}
    ok = count_ok and replay_ok and got == expected
    record(6, ok, f"count rule {'ok' if count_ok else 'broken'}, replay {'ok' if replay_ok else 'broken'}, "
                  f"SaTAD counts {got}")


def test_criterion_7_distance_identities():
    rng = np.random.default_rng(7)
    self_d = trans = scale = sym = 0.0
    rel = []
    for _ in range(100):
        left, right = soh.split_halves(rng.random(72))
        self_d = max(self_d, soh.procrustes_distance(left, left))
        base = soh.procrustes_distance(left, right)
        tx, ty, k = rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0.1, 10)
        moved = CurveHalf(right.x + tx, right.y + ty)
        scaled = CurveHalf(k * right.x, k * right.y)
        trans = max(trans, abs(soh.procrustes_distance(left, moved) - base))
        scale = max(scale, abs(soh.procrustes_distance(left, scaled) - base))
        sym = max(sym, abs(soh.chi_square_distance(left, right) - soh.chi_square_distance(right, left)))
        rel.append(abs(soh.procrustes_y_only(left, right) - base) / base)
    zeros = CurveHalf(np.arange(1.0, 5), np.zeros(4))
    zero_ok = soh.chi_square_distance(zeros, zeros) == 0.0 and \
        soh.chi_square_distance(zeros, CurveHalf(zeros.x, np.array([0, 0, 1.0, 0]))) == 1.0
    ok = self_d <= 1e-9 and trans <= 1e-9 and scale <= 1e-9 and sym == 0 and zero_ok and max(rel) <= 0.05
    record(7, ok, f"self {self_d:.1e}, translation {trans:.1e}, scale {scale:.1e}, chi2 asymmetry {sym:.1e}, "
                  f"0/0 {'ok' if zero_ok else 'broken'}, y-only vs full max rel {max(rel):.1e}")


def test_criterion_8_rotation_invariance():
    angles = (0, 15, 30, 45, 60, 90, 120, 150)
    size = 384
    feats = np.array([[soh.compute_soh(synthetic.canonical_shape("ring", size, width=5 * size / 128, degrees=a),
                                        "SOH-12").all_values[i] for i in range(1, 9)] for a in angles])
    spread = feats.max(axis=0) - feats.min(axis=0)
    allowed = np.maximum(0.1 * np.abs(feats).max(axis=0), 0.01)
    bad = [f"S{i + 1}" for i in np.flatnonzero(spread > allowed)]
    detail = ", ".join(f"S{i + 1} {spread[i]:.4f}/{allowed[i]:.4f}" for i in range(8))
    record(8, not bad, f"{size}px ring, spread/allowed: {detail}")


def test_criterion_9_shape_ordering():
    s = {name: soh.compute_soh(synthetic.canonical_shape(name), "SOH-12").all_values
         for name in ("circle", "rectangle", "triangle")}
    ok = s["circle"][1] < s["rectangle"][1] and s["circle"][7] < s["triangle"][7]
    record(9, ok, f"S1 circle {s['circle'][1]:.2e} < rectangle {s['rectangle'][1]:.2e}; "
                  f"S7 circle {s['circle'][7]:.2e} < triangle {s['triangle'][7]:.2e}")


def test_criterion_10_synthetic_end_to_end():
    ds = pipeline.generate_synthetic(100, seed=10)
    X, y, skipped = pipeline.extract_features(ds, "SOH-07")
    res = ev.cross_validate(X, y, ev.ModelSpec(n_trees=80), ev.CvConfig(folds=5, repeats=1, seed=10))
    model = learn.train_forest(X, y, 80, seed=10)
    ious = []
    for seed in range(5):
        img, box = synthetic.composite(seed=seed)
        regions = pipeline.propose(img, model)
        top = regions[0] if regions else None
        ious.append(pipeline.iou((top.x, top.y, top.width, top.height), box) if top else 0.0)
    ok = not skipped and res.roc.auc > 0.9 and min(ious) >= 0.3
    record(10, ok, f"ROC-AUC {res.roc.auc:.4f} (> 0.9), top-1 IoU on 5 composites "
                   f"{', '.join(f'{v:.2f}' for v in ious)} (>= 0.3)")
