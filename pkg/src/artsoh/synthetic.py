"""Synthetic Artcode-like and non-Artcode images.

Positives are closed outlines holding several inner regions that contain
solid blobs. Negatives are rectangle and triangle outlines and
parallel-line textures. Shapes are rasterised on a 4x supersampled grid and
box-filtered down, so edges are anti-aliased.
"""
from __future__ import annotations

import numpy as np

SUPERSAMPLE = 4


class Canvas:
    """Gray canvas in pixel coordinates with supersampled coverage."""

    def __init__(self, height: int, width: int, background: float = 255.0):
        self.h, self.w = height, width
        self.background = float(background)
        ss = SUPERSAMPLE
        ys = (np.arange(height * ss) + 0.5) / ss
        xs = (np.arange(width * ss) + 0.5) / ss
        self.yy, self.xx = np.meshgrid(ys, xs, indexing="ij")
        self.ink = np.zeros_like(self.xx)  # ink level per subsample, 0 = none
        self.cover = np.zeros(self.xx.shape, dtype=bool)

    def _local(self, cx, cy, angle):
        c, s = np.cos(angle), np.sin(angle)
        dx, dy = self.xx - cx, self.yy - cy
        return c * dx + s * dy, -s * dx + c * dy

    def paint(self, mask, level):
        self.cover |= mask
        self.ink[mask] = level

    def erase(self, mask):
        self.cover &= ~mask

    def ellipse_ring(self, cx, cy, rx, ry, width, level, angle=0.0):
        u, v = self._local(cx, cy, angle)
        outer = (u / (rx + width / 2)) ** 2 + (v / (ry + width / 2)) ** 2 <= 1
        inner = (u / max(rx - width / 2, 1e-6)) ** 2 + (v / max(ry - width / 2, 1e-6)) ** 2 < 1
        self.paint(outer & ~inner, level)

    def disc(self, cx, cy, r, level):
        self.paint((self.xx - cx) ** 2 + (self.yy - cy) ** 2 <= r * r, level)

    def blob(self, cx, cy, r, level, rng, lobes=3):
        """Filled disc with a smooth wavy radius."""
        ang = np.arctan2(self.yy - cy, self.xx - cx)
        amp = rng.uniform(0.0, 0.2)
        phase = rng.uniform(0, 2 * np.pi)
        rad = r * (1 + amp * np.sin(lobes * ang + phase))
        self.paint(np.hypot(self.xx - cx, self.yy - cy) <= rad, level)

    def rect_outline(self, cx, cy, hw, hh, width, level, angle=0.0):
        u, v = self._local(cx, cy, angle)
        outer = (np.abs(u) <= hw + width / 2) & (np.abs(v) <= hh + width / 2)
        inner = (np.abs(u) < hw - width / 2) & (np.abs(v) < hh - width / 2)
        self.paint(outer & ~inner, level)

    def triangle_outline(self, cx, cy, r, width, level, angle=0.0):
        """Equilateral triangle outline; ``r`` is the circumradius of the stroke centre."""
        u, v = self._local(cx, cy, angle)
        # signed distance to each edge line, positive inside
        apothem = r / 2
        d = []
        for k in range(3):
            a = np.pi / 2 + k * 2 * np.pi / 3
            d.append(apothem - (u * np.cos(a) + v * np.sin(a)))
        dmin = np.minimum(np.minimum(d[0], d[1]), d[2])
        self.paint(np.abs(dmin) <= width / 2, level)

    def stripes(self, cx, cy, half, period, width, level, angle=0.0):
        u, v = self._local(cx, cy, angle)
        inside = (np.abs(u) <= half) & (np.abs(v) <= half)
        self.paint(inside & (np.mod(u, period) < width), level)

    def render(self) -> np.ndarray:
        ss = SUPERSAMPLE
        val = np.where(self.cover, self.ink, self.background)
        return val.reshape(self.h, ss, self.w, ss).mean(axis=(1, 3))


def to_rgb(gray: np.ndarray) -> np.ndarray:
    return np.repeat(np.rint(gray)[..., None], 3, axis=2)


def artcode_like(rng, size: int = 128, background: float = 255.0, ink: float = 20.0) -> np.ndarray:
    """Closed outline with three inner regions, each holding blobs."""
    cv = Canvas(size, size, background)
    c = size / 2
    R = size * rng.uniform(0.36, 0.44)
    aspect = rng.uniform(0.8, 1.0)
    ang = rng.uniform(0, np.pi)
    w = size * rng.uniform(0.03, 0.06)
    cv.ellipse_ring(c, c, R, R * aspect, w, ink, ang)
    n_regions = 3
    ring_r = R * aspect * 0.5
    r_in = R * aspect * rng.uniform(0.26, 0.32)
    base = rng.uniform(0, 2 * np.pi)
    for k in range(n_regions):
        a = base + 2 * np.pi * k / n_regions
        px, py = c + ring_r * np.cos(a), c + ring_r * np.sin(a)
        wi = w * rng.uniform(0.6, 0.9)
        cv.ellipse_ring(px, py, r_in, r_in * rng.uniform(0.85, 1.0), wi, ink, rng.uniform(0, np.pi))
        n_blobs = int(rng.integers(1, 3))
        for b in range(n_blobs):
            off = 0.0 if n_blobs == 1 else r_in * 0.38
            ba = rng.uniform(0, 2 * np.pi) + np.pi * b
            cv.blob(px + off * np.cos(ba), py + off * np.sin(ba), r_in * rng.uniform(0.22, 0.3), ink, rng)
    return to_rgb(cv.render())


def non_artcode(rng, size: int = 128, background: float = 255.0, ink: float = 20.0, kind: str | None = None) -> np.ndarray:
    """Rectangle, triangle or parallel-line image."""
    kind = kind or ("rectangle", "triangle", "lines")[int(rng.integers(3))]
    cv = Canvas(size, size, background)
    c = size / 2
    ang = rng.uniform(0, np.pi)
    w = size * rng.uniform(0.03, 0.06)
    if kind == "rectangle":
        hw = size * rng.uniform(0.28, 0.42)
        hh = hw * rng.uniform(0.6, 1.0)
        cv.rect_outline(c, c, hw, hh, w, ink, ang)
        if rng.random() < 0.5:
            cv.rect_outline(c, c, hw * 0.5, hh * 0.5, w, ink, ang)
    elif kind == "triangle":
        r = size * rng.uniform(0.34, 0.44)
        cv.triangle_outline(c, c, r, w, ink, ang)
        if rng.random() < 0.5:
            cv.triangle_outline(c, c, r * 0.45, w, ink, ang)
    elif kind == "lines":
        period = size * rng.uniform(0.08, 0.16)
        cv.stripes(c, c, size * rng.uniform(0.3, 0.42), period, period * rng.uniform(0.3, 0.5), ink, ang)
    else:
        raise ValueError(f"unknown negative kind {kind!r}")
    return to_rgb(cv.render())


def canonical_shape(name: str, size: int = 128, width: float = 5.0, degrees: float = 0.0) -> np.ndarray:
    """Fixed shapes for shape-study comparisons, drawn rotated by ``degrees``.

    The rotation is applied to the geometry before rasterising, so every
    rotated copy is anti-aliased the same way.
    """
    cv = Canvas(size, size, 255.0)
    c = size / 2
    t = np.deg2rad(degrees)
    if name == "circle":
        cv.ellipse_ring(c, c, size * 0.36, size * 0.36, width, 0.0)
    elif name == "ellipse":
        cv.ellipse_ring(c, c, size * 0.40, size * 0.26, width, 0.0, t)
    elif name == "rectangle":
        cv.rect_outline(c, c, size * 0.36, size * 0.24, width, 0.0, t)
    elif name == "triangle":
        cv.triangle_outline(c, c, size * 0.42, width, 0.0, t)
    elif name == "ring":
        cv.ellipse_ring(c, c, size * 0.38, size * 0.38, width, 0.0)
        for k in range(3):
            a = 2 * np.pi * k / 3 + np.pi / 2 + t
            px, py = c + size * 0.19 * np.cos(a), c + size * 0.19 * np.sin(a)
            cv.ellipse_ring(px, py, size * 0.1, size * 0.1, width * 0.8, 0.0)
            cv.disc(px, py, size * 0.035, 0.0)
    else:
        raise ValueError(f"unknown canonical shape {name!r}")
    return to_rgb(cv.render())


def rotate_image(img: np.ndarray, degrees: float, fill: float = 255.0) -> np.ndarray:
    """Rotate about the centre with bilinear resampling (same canvas size)."""
    from scipy import ndimage

    return np.clip(ndimage.rotate(np.asarray(img, dtype=np.float64), degrees, axes=(1, 0), reshape=False,
                                  order=1, mode="constant", cval=fill), 0, 255)


def generate(count_per_class: int, seed=None, size: int = 128):
    """Deterministic list of ``(image, label)``, positives first."""
    if count_per_class < 1:
        raise ValueError("count_per_class must be >= 1")
    pos_ss, neg_ss = np.random.SeedSequence(seed).spawn(2)
    out = []
    for label, ss in ((1, pos_ss), (0, neg_ss)):
        for child in ss.spawn(count_per_class):
            rng = np.random.default_rng(child)
            bg = rng.uniform(190, 255)
            ink = rng.uniform(0, 90)
            img = artcode_like(rng, size, bg, ink) if label else non_artcode(rng, size, bg, ink)
            out.append((img, label))
    return out


def composite(seed=None, size: int = 256, pattern_size: int = 96, n_distractors: int = 2):
    """Canvas with one planted Artcode-like pattern and a few distractors.

    Returns ``(image, (x, y, w, h))`` of the planted pattern.
    """
    rng = np.random.default_rng(seed)
    bg = 235.0
    canvas = np.full((size, size), bg)
    occupied = []

    def free_spot(s):
        for _ in range(200):
            x = int(rng.integers(0, size - s + 1))
            y = int(rng.integers(0, size - s + 1))
            if all(x + s <= ox or ox + os_ <= x or y + s <= oy or oy + os_ <= y for ox, oy, os_ in occupied):
                occupied.append((x, y, s))
            else:
                continue
            return x, y
        raise ValueError("could not place pattern without overlap")

    px, py = free_spot(pattern_size)
    patch = artcode_like(rng, pattern_size, bg, 20.0)[..., 0]
    canvas[py:py + pattern_size, px:px + pattern_size] = patch
    for _ in range(n_distractors):
        s = pattern_size // 2
        try:
            x, y = free_spot(s)
        except ValueError:
            break
        patch = non_artcode(rng, s, bg, 20.0, kind=("rectangle", "lines")[int(rng.integers(2))])[..., 0]
        canvas[y:y + s, x:x + s] = patch
    return to_rgb(canvas), (px, py, pattern_size, pattern_size)
