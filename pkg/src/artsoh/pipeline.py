"""Datasets on disk, synthetic datasets, sliding-window proposals and run configs."""
from __future__ import annotations

import json
import shutil
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import imgproc, synthetic
from .errors import ImageFormatError, LayoutError, ParameterError
from .evaluation import CvConfig, ModelSpec
from .soh import SohConfig, compute_soh

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
POSITIVE_DIR = "artcode"
NEGATIVE_DIR = "non-artcode"
EXPECTED_COUNTS = {"TAD": (47, 116), "EAD": (75, 116)}


@dataclass
class ImageEntry:
    path: Path | None
    label: int
    image: np.ndarray | None = field(default=None, repr=False)

    def load(self) -> np.ndarray:
        return self.image if self.image is not None else imgproc.read_image(self.path)


@dataclass
class ImageDataset:
    entries: list[ImageEntry]
    source: str = "custom"
    skipped: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    @property
    def labels(self) -> np.ndarray:
        return np.array([e.label for e in self.entries], dtype=np.int64)

    def count(self, label: int) -> int:
        return sum(e.label == label for e in self.entries)

    def images(self):
        for e in self.entries:
            yield e.load()


def _scan(folder: Path) -> list[Path]:
    return sorted(p for p in folder.rglob("*") if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def load_dataset(root, source: str = "custom") -> ImageDataset:
    """Enumerate ``root/artcode`` (label 1) and ``root/non-artcode`` (label 0).

    Files are listed recursively in lexicographic order. Files that do not
    decode are skipped with a warning and listed in ``skipped``.
    """
    root = Path(root)
    dirs = {1: root / POSITIVE_DIR, 0: root / NEGATIVE_DIR}
    missing = [str(d) for d in dirs.values() if not d.is_dir()]
    if missing:
        raise LayoutError(f"dataset root must contain {POSITIVE_DIR}/ and {NEGATIVE_DIR}/; missing: {', '.join(missing)}")
    entries, skipped = [], []
    for label in (1, 0):
        for p in _scan(dirs[label]):
            try:
                imgproc.read_image(p)
            except ImageFormatError as exc:
                warnings.warn(f"skipping {p}: {exc}", stacklevel=2)
                skipped.append((str(p), str(exc)))
                continue
            entries.append(ImageEntry(p, label))
    ds = ImageDataset(entries, source.upper() if source.upper() in EXPECTED_COUNTS else source, skipped)
    expected = EXPECTED_COUNTS.get(ds.source)
    if expected and (ds.count(1), ds.count(0)) != expected:
        warnings.warn(f"{ds.source} expects {expected[0]}/{expected[1]} images, found {ds.count(1)}/{ds.count(0)}",
                      stacklevel=2)
    return ds


def import_archive(src, dest, negative_keys=("non", "negative"), positive_keys=("artcode", "positive")) -> dict:
    """Copy an unpacked archive into the ``artcode/`` / ``non-artcode/`` layout.

    A file is negative when any directory on its relative path contains one of
    ``negative_keys`` (case-insensitive), otherwise positive when a directory
    contains one of ``positive_keys``. Other files are ignored. Returns the
    per-label counts.
    """
    src, dest = Path(src), Path(dest)
    if not src.is_dir():
        raise LayoutError(f"{src} is not a directory")
    counts = {1: 0, 0: 0, "ignored": 0}
    for p in _scan(src):
        parts = [s.lower() for s in p.relative_to(src).parts[:-1]]
        if any(k in s for s in parts for k in negative_keys):
            label = 0
        elif any(k in s for s in parts for k in positive_keys):
            label = 1
        else:
            counts["ignored"] += 1
            continue
        out = dest / (POSITIVE_DIR if label else NEGATIVE_DIR) / p.relative_to(src)
        out.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(p, out)
        counts[label] += 1
    return counts


def generate_synthetic(count_per_class: int, seed=None, size: int = 128, root=None) -> ImageDataset:
    """In-memory synthetic dataset; optionally also written under ``root``."""
    if count_per_class < 1:
        raise ParameterError("count_per_class must be >= 1")
    entries = []
    for i, (img, label) in enumerate(synthetic.generate(count_per_class, seed, size)):
        path = None
        if root is not None:
            folder = Path(root) / (POSITIVE_DIR if label else NEGATIVE_DIR)
            folder.mkdir(parents=True, exist_ok=True)
            path = folder / f"synth_{i:05d}.png"
            imgproc.write_image(path, img)
        entries.append(ImageEntry(path, label, img))
    return ImageDataset(entries, "synthetic")


def extract_features(dataset: ImageDataset, variant: str = "SOH-07", config: SohConfig | None = None):
    """Feature matrix and labels; images failing to decode are skipped and returned."""
    rows, labels, skipped = [], [], list(dataset.skipped)
    for e in dataset.entries:
        try:
            img = e.load()
        except ImageFormatError as exc:
            warnings.warn(f"skipping {e.path}: {exc}", stacklevel=2)
            skipped.append((str(e.path), str(exc)))
            continue
        rows.append(compute_soh(img, variant, config).values)
        labels.append(e.label)
    if not rows:
        raise ParameterError("no decodable images to extract features from")
    return np.vstack(rows), np.array(labels, dtype=np.int64), skipped


@dataclass
class WindowConfig:
    scales: tuple = (1 / 2, 1 / 3, 1 / 4)
    stride_fraction: float = 0.25
    score_threshold: float = 0.5
    nms_iou: float = 0.5

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scales"] = list(self.scales)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WindowConfig":
        d = dict(d)
        if "scales" in d:
            d["scales"] = tuple(d["scales"])
        return cls(**d)


@dataclass(frozen=True)
class ProposalRegion:
    x: int
    y: int
    width: int
    height: int
    score: float

    def to_dict(self) -> dict:
        return asdict(self)


def iou(a, b) -> float:
    """Intersection over union of two ``(x, y, w, h)`` boxes or regions."""
    ax, ay, aw, ah = (a.x, a.y, a.width, a.height) if isinstance(a, ProposalRegion) else a
    bx, by, bw, bh = (b.x, b.y, b.width, b.height) if isinstance(b, ProposalRegion) else b
    iw = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    ih = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def non_max_suppression(regions, max_iou: float = 0.5) -> list[ProposalRegion]:
    """Greedy NMS: keep the best region, drop any with IoU >= ``max_iou`` to a kept one."""
    kept = []
    for r in sorted(regions, key=lambda r: -r.score):
        if all(iou(r, k) < max_iou for k in kept):
            kept.append(r)
    return kept


def _positions(extent: int, window: int, stride: int) -> list[int]:
    pos = list(range(0, extent - window + 1, stride))
    if pos[-1] != extent - window:
        pos.append(extent - window)
    return pos


def window_sizes(shape, window: WindowConfig) -> list[int]:
    m = min(shape[:2])
    return sorted({int(round(m * s)) for s in window.scales}, reverse=True)


def score_windows(image, model, variant: str = "SOH-07", config: SohConfig | None = None,
                  window: WindowConfig | None = None) -> list[ProposalRegion]:
    """Every window with its score; windows without usable edges get score 0."""
    window = window or WindowConfig()
    img = imgproc.check_rgb(image)
    h, w = img.shape[:2]
    sizes = window_sizes(img.shape, window)
    if not sizes or sizes[-1] < 8:
        raise ParameterError(f"image {w}x{h} is smaller than the smallest window")
    boxes, feats = [], []
    degenerate = []
    for s in sizes:
        stride = max(1, int(round(s * window.stride_fraction)))
        for y in _positions(h, s, stride):
            for x in _positions(w, s, stride):
                f = compute_soh(img[y:y + s, x:x + s], variant, config)
                boxes.append((x, y, s))
                feats.append(f.values)
                degenerate.append(f.degenerate)
    scores = np.asarray(model.score(np.vstack(feats)), dtype=np.float64)
    scores[np.asarray(degenerate)] = 0.0
    return [ProposalRegion(x, y, s, s, float(sc)) for (x, y, s), sc in zip(boxes, scores)]


def propose(image, model, variant: str = "SOH-07", config: SohConfig | None = None,
            window: WindowConfig | None = None) -> list[ProposalRegion]:
    """Multi-scale sliding-window Artcode proposals, best first.

    Square windows of 1/2, 1/3 and 1/4 of the shorter image side slide with a
    quarter-window stride. Windows scoring at least ``score_threshold`` go
    through greedy non-maximum suppression.
    """
    window = window or WindowConfig()
    regions = score_windows(image, model, variant, config, window)
    return filter_regions(regions, window.score_threshold, window.nms_iou)


def filter_regions(regions, score_threshold: float = 0.5, nms_iou: float = 0.5) -> list[ProposalRegion]:
    return non_max_suppression([r for r in regions if r.score >= score_threshold and r.score > 0], nms_iou)


def annotate(image, regions, top: int | None = None) -> np.ndarray:
    """Copy of ``image`` with a circle drawn around each region."""
    from PIL import Image, ImageDraw

    arr = np.clip(np.rint(imgproc.check_rgb(image)), 0, 255).astype(np.uint8)
    pil = Image.fromarray(arr)
    draw = ImageDraw.Draw(pil)
    for r in regions[:top]:
        cx, cy = r.x + r.width / 2, r.y + r.height / 2
        rad = max(r.width, r.height) / 2
        draw.ellipse([cx - rad, cy - rad, cx + rad, cy + rad], outline=(255, 0, 0), width=2)
    return np.asarray(pil, dtype=np.float64)


@dataclass
class RunConfig:
    """Every tunable of a run plus the master seed; serialised next to reports."""

    seed: int = 0
    variant: str = "SOH-07"
    soh: SohConfig = field(default_factory=SohConfig)
    model: ModelSpec = field(default_factory=ModelSpec)
    cv: CvConfig = field(default_factory=CvConfig)
    window: WindowConfig = field(default_factory=WindowConfig)
    satad_variant: int = 4
    smote_k: int = 5
    smote_mode: str = "away"

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "variant": self.variant,
            "soh": self.soh.to_dict(),
            "model": self.model.to_dict(),
            "cv": self.cv.to_dict(),
            "window": self.window.to_dict(),
            "satad_variant": self.satad_variant,
            "smote_k": self.smote_k,
            "smote_mode": self.smote_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        parts = {"soh": SohConfig, "model": ModelSpec, "cv": CvConfig, "window": WindowConfig}
        for key, typ in parts.items():
            if key in d:
                d[key] = typ.from_dict(d[key])
        return cls(**d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))
