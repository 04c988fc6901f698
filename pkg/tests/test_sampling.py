import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artsoh import sampling, soh
from artsoh.errors import ParameterError
from artsoh.sampling import LabeledDataset

from oracles import on_away_segment


def tad_like(seed=0, n_pos=47, n_neg=116, d=7):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(1.0, 1.0, (n_pos, d)), rng.normal(0.0, 1.0, (n_neg, d))])
    y = np.r_[np.ones(n_pos, int), np.zeros(n_neg, int)]
    return LabeledDataset(X, y)


def test_dataset_validation():
    with pytest.raises(ParameterError):
        LabeledDataset(np.zeros((3, 2)), [0, 1])
    with pytest.raises(ParameterError):
        LabeledDataset(np.zeros((2, 2)), [0, 2])


def test_smote_counts_and_originals_kept():
    data = tad_like()
    out = sampling.smote(data, 200, 5, 1, seed=0)
    assert out.count(1) == 47 + 94 and out.count(0) == 116
    assert out.synthetic.sum() == 94
    np.testing.assert_array_equal(out.X[: len(data)], data.X)
    np.testing.assert_array_equal(out.y[: len(data)], data.y)


@pytest.mark.parametrize("n_percent,expected", [(100, 47), (150, 47), (250, 94), (300, 141)])
def test_smote_amount_is_floored(n_percent, expected):
    out = sampling.smote(tad_like(), n_percent, 5, 1, seed=1)
    assert out.synthetic.sum() == expected


def test_smote_zero_length_segment():
    data = LabeledDataset(np.array([[1.0, 2.0], [1.0, 2.0], [5.0, 5.0]]), [1, 1, 0])
    out = sampling.smote(data, 100, 1, 1, seed=0)
    np.testing.assert_array_equal(out.X[out.synthetic], [[1.0, 2.0], [1.0, 2.0]])


def test_smote_trace_replays():
    data = tad_like(3)
    out, trace = sampling.smote(data, 200, 5, 1, seed=4, return_trace=True)
    synth = out.X[out.synthetic]
    assert len(trace) == len(synth)
    nn = sampling.nearest_neighbors(data.X[data.y == 1], 5)
    pos = np.flatnonzero(data.y == 1)
    for s, step in zip(synth, trace):
        assert 0 <= step.r <= 1
        f, g = data.X[step.current], data.X[step.neighbor]
        np.testing.assert_allclose(s, f + step.r * (f - g), atol=1e-12)
        assert step.neighbor in pos[nn[np.flatnonzero(pos == step.current)[0]]]


def test_smote_brute_force_segment_membership():
    data = tad_like(5, n_pos=12, n_neg=20, d=3)
    out = sampling.smote(data, 100, 3, 1, seed=9)
    minority = data.X[data.y == 1]
    for s in out.X[out.synthetic]:
        assert on_away_segment(s, minority)


def test_smote_toward_stays_in_bounding_box():
    data = tad_like(2)
    out = sampling.smote(data, 300, 5, 1, seed=2, mode="toward")
    minority = data.X[data.y == 1]
    synth = out.X[out.synthetic]
    assert (synth >= minority.min(0) - 1e-12).all() and (synth <= minority.max(0) + 1e-12).all()


def test_nearest_neighbors_ties_go_to_lower_index():
    X = np.array([[0.0], [1.0], [-1.0], [2.0]])
    nn = sampling.nearest_neighbors(X, 2)
    assert nn[0].tolist() == [1, 2]


def test_smote_rejects_bad_params():
    data = tad_like(n_pos=5, n_neg=5)
    with pytest.raises(ParameterError):
        sampling.smote(data, 100, 5)  # needs k + 1 = 6 samples
    with pytest.raises(ParameterError):
        sampling.smote(data, 50, 2)
    with pytest.raises(ParameterError):
        sampling.smote(data, 100, 0)
    with pytest.raises(ParameterError):
        sampling.smote(data, 100, 2, mode="sideways")


def test_smote_determinism_csv_bytes(tmp_path):
    data = tad_like(8)
    paths = []
    for i in range(2):
        out = sampling.smote(data, 200, 5, 1, seed=11)
        p = tmp_path / f"s{i}.csv"
        soh.write_feature_csv(p, out.X, out.y, "SOH-07")
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_undersample():
    data = tad_like()
    out = sampling.random_undersample(data, 0, 70, seed=0)
    assert out.count(0) == 70 and out.count(1) == 47
    same = sampling.random_undersample(data, 0, 116, seed=0)
    np.testing.assert_array_equal(same.X, data.X)
    none = sampling.random_undersample(data, 0, 0, seed=0)
    assert none.count(0) == 0 and none.count(1) == 47
    with pytest.raises(ParameterError):
        sampling.random_undersample(data, 0, 117)
    a = sampling.random_undersample(data, 0, 70, seed=5)
    b = sampling.random_undersample(data, 0, 70, seed=5)
    np.testing.assert_array_equal(a.X, b.X)


@pytest.mark.parametrize("variant,counts", [(1, (94, 70)), (2, (94, 94)), (3, (94, 116)), (4, (141, 147))])
def test_satad_counts(variant, counts):
    out = sampling.build_satad(tad_like(), variant, seed=0)
    assert (out.count(1), out.count(0)) == counts


def test_satad_warns_on_other_counts():
    with pytest.warns(UserWarning):
        out = sampling.build_satad(tad_like(n_pos=20, n_neg=40), 2, seed=0)
    assert out.count(1) == 40


def test_satad_no_warning_for_tad_counts():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sampling.build_satad(tad_like(), 4, seed=0)


@given(st.integers(6, 15), st.integers(1, 4), st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_synthetic_count_rule(t, mult, seed):
    data = tad_like(seed % 100, n_pos=t, n_neg=4, d=2)
    n_percent = 100 * mult + seed % 100
    out = sampling.smote(data, n_percent, 5, 1, seed=seed)
    assert out.synthetic.sum() == (n_percent // 100) * t
