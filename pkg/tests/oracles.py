"""Slow, independent reference computations used to check the library."""
import numpy as np


def procrustes_grid(left, right, step=0.001, scale_max=1.5):
    """Min residual norm over a grid of rotations and scales.

    Both shapes are centred and scaled to unit size first; the right one is
    then rotated by every grid angle and scaled by every grid factor.
    """
    a = np.asarray(left, dtype=float)
    b = np.asarray(right, dtype=float)
    a = a - a.mean(0)
    b = b - b.mean(0)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    thetas = np.arange(0.0, 2 * np.pi, step)
    scales = np.arange(0.0, scale_max + step, step)
    c, s = np.cos(thetas), np.sin(thetas)
    # rotated right shape for every angle: (n_theta, n_points, 2)
    rx = c[:, None] * b[None, :, 0] - s[:, None] * b[None, :, 1]
    ry = s[:, None] * b[None, :, 0] + c[:, None] * b[None, :, 1]
    best = np.inf
    for k in scales:
        d = ((a[None, :, 0] - k * rx) ** 2 + (a[None, :, 1] - k * ry) ** 2).sum(axis=1)
        best = min(best, d.min())
    return float(np.sqrt(best))


def auc_pairs(scores, labels):
    """P(score_pos > score_neg) + P(tie) / 2 by enumerating every pair."""
    pos = [s for s, t in zip(scores, labels) if t == 1]
    neg = [s for s, t in zip(scores, labels) if t == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def on_away_segment(sample, X, tol=1e-9):
    """True when ``sample = F + r (F - G)`` for some rows F != G of X, r in [0, 1]."""
    for i in range(len(X)):
        for j in range(len(X)):
            if i == j:
                continue
            d = X[i] - X[j]
            dd = float(d @ d)
            if dd == 0:
                if np.allclose(sample, X[i], atol=tol):
                    return True
                continue
            r = float((sample - X[i]) @ d) / dd
            if -tol <= r <= 1 + tol and np.allclose(X[i] + r * d, sample, atol=tol):
                return True
    return False


def chi_square(y, v):
    total = 0.0
    for a, b in zip(y, v):
        if a + b != 0:
            total += (a - b) ** 2 / (a + b)
    return total
