"""Raster preprocessing: grayscale, Gaussian smoothing, Sobel gradients and edges.

Images are plain numpy arrays. An RGB image is ``(H, W, 3)`` with channel
values in [0, 255]; a gray image is ``(H, W)`` float64. Angles are degrees in
[-180, 180) measured with the image y-axis pointing down.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ImageFormatError, ParameterError

GRAY_WEIGHTS = (0.2989, 0.5878, 0.1140)
AUTO = "auto"
AUTO_THRESHOLD_FACTOR = 4.0

_SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T.copy()


@dataclass(frozen=True)
class GradientField:
    orientation: np.ndarray
    magnitude: np.ndarray

    @property
    def used(self) -> np.ndarray:
        """Pixels where the orientation is defined (nonzero magnitude)."""
        return self.magnitude > 0


@dataclass(frozen=True)
class EdgeMask:
    mask: np.ndarray
    edge_intensities: np.ndarray
    threshold: float


def check_rgb(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ParameterError(f"expected an (H, W, 3) RGB array, got shape {img.shape}")
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ParameterError("image must be at least 3x3 pixels")
    return img


def to_grayscale(img) -> np.ndarray:
    """Weighted channel sum, clamped to [0, 255]; no rounding."""
    img = check_rgb(img)
    r, g, b = GRAY_WEIGHTS
    gray = r * img[..., 0] + g * img[..., 1] + b * img[..., 2]
    return np.clip(gray, 0.0, 255.0)


def gaussian_kernel(sigma: float, size: int) -> np.ndarray:
    """1-D Gaussian weights at integer offsets, normalized to sum 1."""
    if sigma <= 0:
        raise ParameterError("sigma must be positive")
    if size < 3 or size % 2 == 0:
        raise ParameterError("kernel size must be odd and >= 3")
    half = size // 2
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return w / w.sum()


def gaussian_smooth(gray, sigma: float = 1.0, kernel_size: int = 5) -> np.ndarray:
    gray = np.asarray(gray, dtype=np.float64)
    if kernel_size > min(gray.shape):
        raise ParameterError(
            f"kernel size {kernel_size} exceeds image dimension {min(gray.shape)}"
        )
    k = gaussian_kernel(sigma, kernel_size)
    out = ndimage.correlate1d(gray, k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def sobel_responses(gray) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical 3x3 Sobel responses (gy grows downward)."""
    gray = np.asarray(gray, dtype=np.float64)
    if gray.ndim != 2 or min(gray.shape) < 3:
        raise ParameterError("gradient needs a 2-D image of at least 3x3")
    gx = ndimage.correlate(gray, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(gray, _SOBEL_Y, mode="nearest")
    return gx, gy


def gradient_field(gray) -> GradientField:
    gx, gy = sobel_responses(gray)
    mag = np.hypot(gx, gy)
    ori = np.degrees(np.arctan2(gy, gx))
    ori[ori >= 180.0] = -180.0
    ori[mag == 0] = 0.0
    return GradientField(orientation=ori, magnitude=mag)


def sobel_edges(gray, threshold=AUTO, grad: GradientField | None = None) -> EdgeMask:
    """Threshold the Sobel magnitude; the outer 1-pixel ring is never an edge.

    ``threshold=AUTO`` uses four times the mean magnitude. Zero-magnitude
    pixels are excluded even when the threshold is zero.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if grad is None:
        grad = gradient_field(gray)
    mag = grad.magnitude
    if isinstance(threshold, str):
        if threshold.lower() != AUTO:
            raise ParameterError(f"unknown threshold mode {threshold!r}")
        thr = AUTO_THRESHOLD_FACTOR * float(mag.mean())
    else:
        thr = float(threshold)
        if thr < 0:
            raise ParameterError("edge threshold must be >= 0")
    mask = (mag >= thr) & (mag > 0)
    mask[0, :] = mask[-1, :] = False
    mask[:, 0] = mask[:, -1] = False
    return EdgeMask(mask=mask, edge_intensities=gray[mask], threshold=thr)


def filter_orientations(grad: GradientField, edges: EdgeMask, mag_fraction: float = 0.1) -> np.ndarray:
    """Orientations on the edge mask whose magnitude is not weak."""
    if not 0 < mag_fraction <= 1:
        raise ParameterError("mag_fraction must lie in (0, 1]")
    if grad.magnitude.shape != edges.mask.shape:
        raise ParameterError("gradient field and edge mask differ in shape")
    peak = grad.magnitude.max(initial=0.0)
    strong = grad.magnitude >= mag_fraction * peak
    keep = edges.mask & strong & grad.used
    return grad.orientation[keep]


def read_image(path) -> np.ndarray:
    """Decode a PNG or JPEG file into an (H, W, 3) float64 array."""
    from PIL import Image, UnidentifiedImageError

    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "JPEG"):
                raise ImageFormatError(f"{path}: unsupported format {im.format}")
            rgb = im.convert("RGB")
            return np.asarray(rgb, dtype=np.float64)
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageFormatError(f"{path}: cannot decode image ({exc})") from exc


def write_image(path, img) -> None:
    from PIL import Image

    arr = np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(path, format="PNG")
