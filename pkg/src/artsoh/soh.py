"""Shape-of-orientation-histogram (SOH) descriptor.

The orientation histogram of the strong edge gradients is summarised by how
alike its two halves ([-180, 0) and [0, 180)) look and by how smoothly its
cumulative curve grows. Variables S1..S12 are numbered as below; a variant
selects a subset, always emitted in ascending variable order.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from . import imgproc
from .errors import ParameterError

DEFAULT_BINS = 72

VARIANTS: dict[str, tuple[int, ...]] = {
    "SOH-05": (1, 2, 3, 7, 8),
    "SOH-07": (1, 2, 3, 7, 8, 9, 10),
    "SOH-08": (1, 2, 3, 4, 7, 8, 9, 10),
    "SOH-10": (1, 2, 3, 4, 5, 6, 7, 8, 9, 10),
    "SOH-12": tuple(range(1, 13)),
}


def variable_names(variant: str) -> list[str]:
    return [f"S{i}" for i in variant_indices(variant)]


def variant_indices(variant: str) -> tuple[int, ...]:
    try:
        return VARIANTS[variant.upper()]
    except KeyError:
        raise ParameterError(f"unknown SOH variant {variant!r}; choose from {sorted(VARIANTS)}") from None


@dataclass(frozen=True)
class OrientationHistogram:
    bins: np.ndarray
    degenerate: bool

    @property
    def n_bins(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class DistanceCurve:
    values: np.ndarray
    slope: float
    intercept: float
    residual: np.ndarray


@dataclass(frozen=True)
class CurveHalf:
    x: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.x)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


@dataclass(frozen=True)
class Superimposition:
    """Result of fitting one curve half onto another."""

    distance: float
    fitted: np.ndarray  # right half after superimposition, (n, 2)
    reference: np.ndarray  # left half centred and scaled, (n, 2)
    rotation: float  # radians
    scale: float
    degenerate: bool


@dataclass
class SohConfig:
    sigma: float = 1.0
    kernel_size: int = 5
    edge_threshold: float | str = imgproc.AUTO
    mag_fraction: float = 0.1
    n_bins: int = DEFAULT_BINS
    # "distance" compares distance-curve halves for S1-S4; "cumulative" uses
    # the raw cumulative-curve halves instead (ablation switch).
    symmetry_source: str = "distance"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SohConfig":
        return cls(**d)


@dataclass(frozen=True)
class SohFeature:
    variant: str
    values: np.ndarray
    degenerate: bool
    all_values: dict[int, float] = field(repr=False, default_factory=dict)

    @property
    def names(self) -> list[str]:
        return variable_names(self.variant)


def build_histogram(angles, n_bins: int = DEFAULT_BINS) -> OrientationHistogram:
    """Normalized histogram over [-180, 180) with ``n_bins`` equal bins."""
    if n_bins < 4 or n_bins % 2:
        raise ParameterError("n_bins must be even and >= 4")
    angles = np.asarray(angles, dtype=np.float64).ravel()
    if angles.size == 0:
        return OrientationHistogram(np.zeros(n_bins), degenerate=True)
    idx = np.floor((angles + 180.0) * (n_bins / 360.0)).astype(np.int64)
    # +180 wraps onto the first bin; rounding can push -tiny values one low
    idx = np.where(idx >= n_bins, idx - n_bins, idx)
    idx = np.clip(idx, 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins).astype(np.float64)
    return OrientationHistogram(counts / angles.size, degenerate=False)


def cumulative(hist) -> np.ndarray:
    bins = hist.bins if isinstance(hist, OrientationHistogram) else np.asarray(hist, dtype=np.float64)
    return np.cumsum(bins)


def fit_and_distance(curve) -> DistanceCurve:
    """Least-squares line through (k, C(k)), k = 1..n.

    Returns perpendicular point-to-line distances and the vertical residuals.
    """
    c = np.asarray(curve, dtype=np.float64)
    n = c.size
    if n < 2:
        raise ParameterError("need at least two curve points")
    k = np.arange(1, n + 1, dtype=np.float64)
    kc = k - k.mean()
    slope = float(np.dot(kc, c - c.mean()) / np.dot(kc, kc))
    intercept = float(c.mean() - slope * k.mean())
    fitted = slope * k + intercept
    dist = np.abs(slope * k - c + intercept) / np.sqrt(slope * slope + 1.0)
    return DistanceCurve(values=dist, slope=slope, intercept=intercept, residual=np.abs(fitted - c))


def split_halves(series) -> tuple[CurveHalf, CurveHalf]:
    """Left and right halves; both get x = 1..n so they can be compared."""
    y = np.asarray(series, dtype=np.float64).ravel()
    if y.size % 2:
        raise ParameterError("series length must be even to split")
    n = y.size // 2
    x = np.arange(1, n + 1, dtype=np.float64)
    return CurveHalf(x, y[:n].copy()), CurveHalf(x.copy(), y[n:].copy())


def _as_points(half) -> np.ndarray:
    if isinstance(half, CurveHalf):
        return half.points
    pts = np.asarray(half, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ParameterError("curve half must be an (n, 2) point array")
    return pts


def procrustes_superimpose(left, right) -> Superimposition:
    """Superimpose ``right`` onto ``left``: translation, scale, rotation.

    Both shapes are centred and scaled to unit centroid size, then the right
    one is rotated and rescaled to best match the left in least squares.
    Reflections are not allowed. Working in the complex plane, with
    ``z = sum(conj(l_i) * r_i)``, the optimal rotation is ``-arg(z)``, the
    optimal scale is ``|z|`` and the residual norm is ``sqrt(1 - |z|^2)``.
    """
    a = _as_points(left)
    b = _as_points(right)
    if a.shape != b.shape:
        raise ParameterError("curve halves must have equal length")
    if a.shape[0] < 2:
        raise ParameterError("need at least two points per half")
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    na = np.sqrt((a * a).sum())
    nb = np.sqrt((b * b).sum())
    if na == 0 or nb == 0:
        # zero-spread shape: compare centred points with the other unscaled
        ref = a / na if na > 0 else a
        fit = b / nb if nb > 0 else b
        d = float(np.sqrt(((ref - fit) ** 2).sum()))
        return Superimposition(d, fit, ref, 0.0, 1.0, degenerate=True)
    a = a / na
    b = b / nb
    za = a[:, 0] + 1j * a[:, 1]
    zb = b[:, 0] + 1j * b[:, 1]
    z = np.vdot(za, zb)  # sum(conj(za) * zb)
    scale = abs(z)
    theta = -np.angle(z) if scale > 0 else 0.0
    zf = scale * np.exp(1j * theta) * zb
    fit = np.column_stack([zf.real, zf.imag])
    # the residual norm equals sqrt(1 - |z|^2), but that form cancels badly
    # for near-identical shapes, so sum the residuals directly
    d = float(np.sqrt(np.sum(np.abs(za - zf) ** 2)))
    return Superimposition(d, fit, a, float(theta), float(scale), degenerate=False)


def procrustes_distance(left, right) -> float:
    return procrustes_superimpose(left, right).distance


def procrustes_y_only(left, right) -> float:
    """The y-only approximation: residual norm over the y coordinates."""
    s = procrustes_superimpose(left, right)
    return float(np.sqrt(((s.reference[:, 1] - s.fitted[:, 1]) ** 2).sum()))


def _yvalues(half) -> np.ndarray:
    if isinstance(half, CurveHalf):
        return half.y
    arr = np.asarray(half, dtype=np.float64)
    return arr[:, 1] if arr.ndim == 2 else arr


def chi_square_distance(left, right, signed: bool = False) -> float:
    """Sum of (y - v)^2 / (y + v) with 0/0 terms counted as 0.

    Inputs must be nonnegative unless ``signed`` is set, in which case the
    denominator becomes ``|y| + |v|`` (identical for nonnegative data).
    """
    y = _yvalues(left)
    v = _yvalues(right)
    if y.shape != v.shape:
        raise ParameterError("curve halves must have equal length")
    if signed:
        den = np.abs(y) + np.abs(v)
    else:
        if (y < 0).any() or (v < 0).any():
            raise ParameterError("chi-square distance needs nonnegative values")
        den = y + v
    num = (y - v) ** 2
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(terms.sum())


def first_derivative(half: CurveHalf) -> CurveHalf:
    if len(half) < 2:
        raise ParameterError("derivative needs at least two points")
    dy = np.diff(half.y)
    return CurveHalf(np.arange(1, dy.size + 1, dtype=np.float64), dy)


def soh_variables(gray_smooth: np.ndarray, angles: np.ndarray, edge_intensities: np.ndarray,
                  n_bins: int = DEFAULT_BINS, symmetry_source: str = "distance") -> tuple[dict[int, float], bool]:
    """All twelve variables from a smoothed gray image and filtered angles."""
    hist = build_histogram(angles, n_bins)
    s: dict[int, float] = {}
    if hist.degenerate:
        for i in range(1, 9):
            s[i] = 0.0
    else:
        cum = cumulative(hist)
        dc = fit_and_distance(cum)
        if symmetry_source == "distance":
            base = dc.values
        elif symmetry_source == "cumulative":
            base = cum
        else:
            raise ParameterError(f"unknown symmetry source {symmetry_source!r}")
        cl, cr = split_halves(base)
        dl, dr = first_derivative(cl), first_derivative(cr)
        hl, hr = split_halves(hist.bins)
        s[1] = procrustes_distance(cl, cr)
        s[2] = chi_square_distance(cl, cr)
        s[3] = procrustes_distance(dl, dr)
        s[4] = chi_square_distance(dl, dr, signed=True)
        s[5] = procrustes_distance(hl, hr)
        s[6] = chi_square_distance(hl, hr)
        s[7] = float(dc.residual.mean())
        s[8] = float(dc.residual.std())
    s[9] = float(gray_smooth.mean())
    s[10] = float(gray_smooth.std())
    if edge_intensities.size:
        s[11] = float(edge_intensities.mean())
        s[12] = float(edge_intensities.std())
    else:
        s[11] = s[12] = 0.0
    return s, hist.degenerate


def orientation_pipeline(img, config: SohConfig):
    """Grayscale, smooth, gradients, edges, filtered angles."""
    gray = imgproc.to_grayscale(img)
    smooth = imgproc.gaussian_smooth(gray, config.sigma, config.kernel_size)
    grad = imgproc.gradient_field(smooth)
    edges = imgproc.sobel_edges(smooth, config.edge_threshold, grad=grad)
    angles = imgproc.filter_orientations(grad, edges, config.mag_fraction)
    return smooth, grad, edges, angles


def compute_soh(img, variant: str = "SOH-07", config: SohConfig | None = None) -> SohFeature:
    config = config or SohConfig()
    idx = variant_indices(variant)
    smooth, _, edges, angles = orientation_pipeline(img, config)
    s, degenerate = soh_variables(smooth, angles, edges.edge_intensities,
                                  config.n_bins, config.symmetry_source)
    values = np.array([s[i] for i in idx], dtype=np.float64)
    return SohFeature(variant=variant.upper(), values=values, degenerate=degenerate, all_values=s)


def extract_batch(images: Iterable, variant: str = "SOH-07", config: SohConfig | None = None) -> np.ndarray:
    return np.vstack([compute_soh(im, variant, config).values for im in images])


def write_feature_csv(path, X, y, variant: str) -> None:
    """One row per sample, variant columns then the integer label."""
    X = np.asarray(X, dtype=np.float64)
    names = variable_names(variant)
    if X.ndim != 2 or X.shape[1] != len(names):
        raise ParameterError(f"{variant} expects {len(names)} columns, got {X.shape}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["label"])
        for row, label in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [int(label)])


def read_feature_csv(path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParameterError(f"{path}: empty feature file")
    header, body = rows[0], rows[1:]
    if header and header[-1].strip().lower() == "label":
        names = [h.strip() for h in header[:-1]]
    else:
        # headerless rows, label in the last column
        names = [f"f{i + 1}" for i in range(len(header) - 1)]
        body = rows
    X = np.array([[float(v) for v in r[:-1]] for r in body], dtype=np.float64).reshape(len(body), len(names))
    y = np.array([int(float(r[-1])) for r in body], dtype=np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ParameterError(f"{path}: labels must be 0 or 1")
    return X, y, names


def variant_from_names(names: list[str]) -> str | None:
    for v in VARIANTS:
        if variable_names(v) == names:
            return v
    return None
