import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artsoh import imgproc, learn, pipeline, synthetic
from artsoh.errors import LayoutError, ParameterError
from artsoh.pipeline import ProposalRegion, RunConfig, WindowConfig


@pytest.fixture(scope="module")
def small_model():
    ds = pipeline.generate_synthetic(30, seed=1)
    X, y, _ = pipeline.extract_features(ds)
    return learn.train_forest(X, y, 30, seed=0)


def write_layout(root, n_pos=2, n_neg=3):
    images = synthetic.generate(max(n_pos, n_neg), seed=2, size=32)
    pos = [img for img, label in images if label][:n_pos]
    neg = [img for img, label in images if not label][:n_neg]
    for name, group in (("artcode", pos), ("non-artcode", neg)):
        folder = root / name / "sub"
        folder.mkdir(parents=True)
        for i, img in enumerate(group):
            imgproc.write_image(folder / f"img{i:02d}.png", img)


def test_load_dataset_layout(tmp_path):
    write_layout(tmp_path)
    (tmp_path / "artcode" / "notes.txt").write_text("ignored")
    (tmp_path / "non-artcode" / "broken.png").write_bytes(b"garbage")
    with pytest.warns(UserWarning, match="skipping"):
        ds = pipeline.load_dataset(tmp_path)
    assert (ds.count(1), ds.count(0)) == (2, 3)
    assert len(ds.skipped) == 1
    paths = [e.path for e in ds.entries]
    assert paths[:2] == sorted(paths[:2]) and paths[2:] == sorted(paths[2:])
    assert ds.labels.tolist() == [1, 1, 0, 0, 0]


def test_load_dataset_errors(tmp_path):
    with pytest.raises(LayoutError):
        pipeline.load_dataset(tmp_path)
    (tmp_path / "artcode").mkdir()
    (tmp_path / "non-artcode").mkdir()
    ds = pipeline.load_dataset(tmp_path)
    assert len(ds) == 0
    with pytest.raises(ParameterError):
        pipeline.extract_features(ds)


def test_tad_count_mismatch_warns(tmp_path):
    write_layout(tmp_path)
    with pytest.warns(UserWarning, match="TAD expects 47/116"):
        ds = pipeline.load_dataset(tmp_path, "tad")
    assert ds.source == "TAD"


def test_import_archive(tmp_path):
    src = tmp_path / "zenodo"
    for sub in ("Artcodes", "Non-Artcodes"):
        (src / sub).mkdir(parents=True)
        imgproc.write_image(src / sub / "a.png", synthetic.canonical_shape("circle", 16))
    (src / "README.png").write_bytes(b"")
    counts = pipeline.import_archive(src, tmp_path / "out")
    assert counts[1] == 1 and counts[0] == 1 and counts["ignored"] == 1
    ds = pipeline.load_dataset(tmp_path / "out")
    assert ds.labels.tolist() == [1, 0]


def test_extract_reports_skips(tmp_path):
    write_layout(tmp_path)
    ds = pipeline.load_dataset(tmp_path)
    ds.entries[0].path.write_bytes(b"corrupted after listing")
    with pytest.warns(UserWarning):
        X, y, skipped = pipeline.extract_features(ds)
    assert X.shape[0] == len(ds) - len(skipped) == 4


def test_synthetic_determinism(tmp_path):
    a = pipeline.generate_synthetic(3, seed=5)
    b = pipeline.generate_synthetic(3, seed=5, root=tmp_path)
    assert all(np.array_equal(x, y) for x, y in zip(a.images(), b.images()))
    assert len(list(tmp_path.rglob("*.png"))) == 6
    for e in b.entries:
        np.testing.assert_array_equal(imgproc.read_image(e.path), e.image)
    c = pipeline.generate_synthetic(3, seed=6)
    assert not np.array_equal(a.entries[0].image, c.entries[0].image)
    with pytest.raises(ParameterError):
        pipeline.generate_synthetic(0)


def test_synthetic_images_valid():
    ds = pipeline.generate_synthetic(4, seed=0)
    for img in ds.images():
        assert img.shape == (128, 128, 3) and img.min() >= 0 and img.max() <= 255
        # anti-aliasing leaves intermediate gray levels
        assert np.unique(img).size > 10
    assert ds.source == "synthetic" and ds.count(1) == ds.count(0) == 4


def test_iou_and_nms():
    assert pipeline.iou((0, 0, 10, 10), (0, 0, 10, 10)) == 1
    assert pipeline.iou((0, 0, 10, 10), (5, 0, 10, 10)) == pytest.approx(50 / 150)
    assert pipeline.iou((0, 0, 4, 4), (10, 10, 4, 4)) == 0
    regions = [ProposalRegion(0, 0, 10, 10, 0.9), ProposalRegion(1, 1, 10, 10, 0.95),
               ProposalRegion(30, 30, 10, 10, 0.6)]
    kept = pipeline.non_max_suppression(regions)
    assert [r.score for r in kept] == [0.95, 0.6]


boxes = st.builds(lambda x, y, s, sc: ProposalRegion(x, y, s, s, sc),
                  st.integers(0, 50), st.integers(0, 50), st.integers(5, 30), st.floats(0, 1))


@given(st.lists(boxes, max_size=25), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=100)
def test_filter_properties(regions, t1, t2):
    lo, hi = sorted((t1, t2))
    kept_hi = pipeline.filter_regions(regions, hi)
    kept_lo = pipeline.filter_regions(regions, lo)
    for a, b in itertools.combinations(kept_lo, 2):
        assert pipeline.iou(a, b) < 0.5
    assert [r.score for r in kept_lo] == sorted((r.score for r in kept_lo), reverse=True)
    # lowering the threshold only adds lower-scored candidates, which NMS
    # visits after every region kept at the higher threshold
    assert set(kept_hi) <= set(kept_lo)


def test_propose_blank_image(small_model):
    assert pipeline.propose(np.full((96, 96, 3), 255.0), small_model) == []


def test_propose_too_small(small_model):
    with pytest.raises(ParameterError):
        pipeline.propose(np.zeros((12, 12, 3)), small_model)


def test_propose_regions_in_bounds(small_model):
    img, box = synthetic.composite(seed=3, size=192, pattern_size=72)
    regions = pipeline.propose(img, small_model)
    assert regions
    sizes = pipeline.window_sizes(img.shape, WindowConfig())
    for r in regions:
        assert 0 <= r.x and r.x + r.width <= 192 and 0 <= r.y and r.y + r.height <= 192
        assert r.width in sizes and 0.5 <= r.score <= 1
    lower = pipeline.propose(img, small_model, window=WindowConfig(score_threshold=0.2))
    assert set(regions) <= set(lower)
    ann = pipeline.annotate(img, regions, top=2)
    assert ann.shape == img.shape and not np.array_equal(ann, img)


def test_window_grid_covers_image():
    assert pipeline._positions(100, 30, 8) == [0, 8, 16, 24, 32, 40, 48, 56, 64, 70]
    assert pipeline.window_sizes((240, 320, 3), WindowConfig()) == [120, 80, 60]


def test_run_config_roundtrip(tmp_path):
    cfg = RunConfig(seed=17, variant="SOH-10")
    cfg.model.kind = "svm"
    cfg.model.cost = ((0.0, 1.0), (5.0, 0.0))
    cfg.soh.edge_threshold = 30.0
    cfg.window.scales = (0.5, 0.25)
    cfg.cv.smote_inside_folds = True
    p = tmp_path / "run.json"
    cfg.save(p)
    assert RunConfig.load(p) == cfg
    assert RunConfig.from_dict(RunConfig().to_dict()) == RunConfig()
