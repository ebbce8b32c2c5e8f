import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noiselab.data import (Dataset, Sample, SyntheticSpec, generate_synthetic, load_dataset, load_idx_pair,
                           save_dataset, split_dataset, write_idx)
from noiselab.errors import ArgumentError, ConsistencyError, DataError, FormatError, RangeError


def _pair(tmp_path, images, labels):
    ip, lp = tmp_path / "img.idx", tmp_path / "lab.idx"
    write_idx(ip, images)
    write_idx(lp, labels)
    return ip, lp


def test_idx_full_scale_pixels(tmp_path):
    ip, lp = _pair(tmp_path, np.full((4, 2, 2), 255, np.uint8), np.array([0, 1, 0, 1], np.uint8))
    d = load_idx_pair(ip, lp, c=2)
    assert d.n == 4 and d.feature_dim == 4
    assert np.all(d.features == 1.0)
    assert d.observed_labels.tolist() == d.true_labels.tolist() == [0, 1, 0, 1]


def test_idx_header_bytes(tmp_path):
    ip, lp = _pair(tmp_path, np.zeros((2, 3, 3), np.uint8), np.zeros(2, np.uint8))
    assert ip.read_bytes()[:4] == bytes([0, 0, 8, 3])
    assert lp.read_bytes()[:8] == bytes([0, 0, 8, 1, 0, 0, 0, 2])


def test_idx_scaling_is_x_over_255(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(3, 2, 2) * 20
    ip, lp = _pair(tmp_path, img, np.array([0, 1, 2], np.uint8))
    d = load_idx_pair(ip, lp, c=3)
    np.testing.assert_array_equal(d.features, img.reshape(3, 4) / 255.0)


def test_idx_volumes_are_flattened(tmp_path):
    ip, lp = _pair(tmp_path, np.ones((3, 2, 2, 2), np.uint8), np.array([0, 1, 1], np.uint8))
    assert load_idx_pair(ip, lp, c=2).feature_dim == 8


def test_idx_empty_label_file(tmp_path):
    ip = tmp_path / "img.idx"
    write_idx(ip, np.zeros((1, 2, 2), np.uint8))
    lp = tmp_path / "lab.idx"
    lp.write_bytes(b"")
    with pytest.raises(FormatError):
        load_idx_pair(ip, lp, c=2)


def test_idx_count_mismatch(tmp_path):
    ip, lp = _pair(tmp_path, np.zeros((5, 2, 2), np.uint8), np.zeros(4, np.uint8))
    with pytest.raises(ConsistencyError):
        load_idx_pair(ip, lp, c=2)


def test_idx_bad_magic_names_field(tmp_path):
    ip, lp = _pair(tmp_path, np.zeros((2, 2, 2), np.uint8), np.zeros(2, np.uint8))
    raw = bytearray(ip.read_bytes())
    raw[2] = 0x0D  # float32 type code
    ip.write_bytes(bytes(raw))
    with pytest.raises(FormatError) as exc:
        load_idx_pair(ip, lp, c=2)
    assert exc.value.field == "magic"


def test_idx_labels_must_be_vector(tmp_path):
    ip, lp = _pair(tmp_path, np.zeros((2, 2, 2), np.uint8), np.zeros((2, 1, 1), np.uint8))
    with pytest.raises(FormatError):
        load_idx_pair(ip, lp, c=2)


def test_idx_truncated_payload(tmp_path):
    ip, lp = _pair(tmp_path, np.zeros((2, 2, 2), np.uint8), np.zeros(2, np.uint8))
    ip.write_bytes(ip.read_bytes()[:-1])
    with pytest.raises(FormatError) as exc:
        load_idx_pair(ip, lp, c=2)
    assert exc.value.field == "payload"


def test_idx_label_out_of_range(tmp_path):
    ip, lp = _pair(tmp_path, np.zeros((2, 2, 2), np.uint8), np.array([0, 2], np.uint8))
    with pytest.raises(RangeError):
        load_idx_pair(ip, lp, c=2)


def test_synthetic_balanced_and_sized():
    d = generate_synthetic(SyntheticSpec(n=100, c=2, feature_dim=2, cluster_spread=0.1, seed=7))
    assert d.n == 100 and d.feature_dim == 2
    counts = np.bincount(d.observed_labels, minlength=2)
    assert counts.max() - counts.min() <= 1
    np.testing.assert_array_equal(d.observed_labels, d.true_labels)
    assert d.features.min() >= 0 and d.features.max() <= 1


def test_synthetic_deterministic():
    spec = SyntheticSpec(n=100, c=3, feature_dim=4, cluster_spread=0.1, seed=7)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    assert a.features.tobytes() == b.features.tobytes()
    np.testing.assert_array_equal(a.observed_labels, b.observed_labels)


def test_synthetic_round_robin_labels():
    d = generate_synthetic(SyntheticSpec(n=10, c=3, feature_dim=2, cluster_spread=0.1, seed=1))
    assert d.observed_labels.tolist() == [i % 3 for i in range(10)]


@pytest.mark.parametrize("kwargs", [dict(n=1, c=2), dict(n=10, c=2, cluster_spread=0.0)])
def test_synthetic_argument_errors(kwargs):
    base = dict(n=10, c=2, feature_dim=2, cluster_spread=0.1, seed=0)
    with pytest.raises(ArgumentError):
        generate_synthetic(SyntheticSpec(**{**base, **kwargs}))


def test_split_nine_to_one():
    d = generate_synthetic(SyntheticSpec(n=10, c=2, feature_dim=2, cluster_spread=0.1, seed=0))
    tr, va, te = split_dataset(d, (0.9, 0.1, 0.0), seed=1)
    assert (tr.n, va.n, te.n) == (9, 1, 0)
    assert (tr.split, va.split, te.split) == ("train", "validation", "test")


def test_split_identity():
    d = generate_synthetic(SyntheticSpec(n=10, c=2, feature_dim=2, cluster_spread=0.1, seed=0))
    tr, va, te = split_dataset(d, {"train": 1.0, "validation": 0.0, "test": 0.0}, seed=1)
    assert (tr.n, va.n, te.n) == (10, 0, 0)
    np.testing.assert_array_equal(tr.features, d.features)


def test_split_bad_fractions():
    d = generate_synthetic(SyntheticSpec(n=10, c=2, feature_dim=2, cluster_spread=0.1, seed=0))
    with pytest.raises(ArgumentError):
        split_dataset(d, (0.5, 0.5, 0.1), seed=1)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 60), a=st.integers(0, 10), b=st.integers(0, 10), seed=st.integers(0, 2**32))
def test_split_is_disjoint_cover(n, a, b, seed):
    total = a + b + 5
    fr = (5 / total, a / total, b / total)
    feats = (np.arange(n, dtype=float) / n)[:, None]
    d = Dataset(feats, np.arange(n) % 2, np.arange(n) % 2, 2)
    parts = split_dataset(d, fr, seed)
    assert sum(p.n for p in parts) == n
    seen = np.concatenate([p.features[:, 0] for p in parts])
    assert sorted(seen.tolist()) == sorted(feats[:, 0].tolist())
    again = split_dataset(d, fr, seed)
    assert all(x.features.tobytes() == y.features.tobytes() for x, y in zip(parts, again))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 20), dim=st.integers(1, 5))
def test_json_round_trip_bit_exact(tmp_path_factory, seed, n, dim):
    from noiselab.rng import Rng
    rng = Rng(seed)
    feats = rng.uniform_array(n * dim).reshape(n, dim)
    true = [rng.integers(3) - 1 for _ in range(n)]  # includes unknown (-1)
    d = Dataset(feats, [rng.integers(2) for _ in range(n)], true, 2, "validation", "rt")
    path = tmp_path_factory.mktemp("rt") / "d.json"
    save_dataset(d, path)
    back = load_dataset(path)
    assert back.features.tobytes() == d.features.tobytes()
    np.testing.assert_array_equal(back.observed_labels, d.observed_labels)
    np.testing.assert_array_equal(back.true_labels, d.true_labels)
    assert (back.c, back.split, back.name, back.feature_dim) == (2, "validation", "rt", dim)


def test_samples_view_and_from_samples():
    samples = [Sample(np.array([0.1, 0.2]), 1, None), Sample(np.array([0.3, 0.4]), 0, 0)]
    d = Dataset.from_samples(samples, c=2, feature_dim=2, split="test")
    assert d[0].true_label is None and d[1].true_label == 0
    assert [s.observed_label for s in d.samples] == [1, 0]
    with pytest.raises(ArgumentError):
        Dataset.from_samples([Sample(np.zeros(3), 0)], c=2, feature_dim=2)


def test_dataset_invariants():
    with pytest.raises(ArgumentError):
        Dataset(np.zeros((2, 2)), [0, 1], [0, 1], c=1)
    with pytest.raises(RangeError):
        Dataset(np.zeros((2, 2)), [0, 2], [0, 1], c=2)
    with pytest.raises(DataError):
        Dataset(np.full((2, 2), 1.5), [0, 1], [0, 1], c=2)
    with pytest.raises(ArgumentError):
        Dataset(np.zeros((2, 2)), [0, 1], [0, 1], c=2, split="holdout")


def test_dataset_is_read_only():
    d = Dataset(np.zeros((2, 2)), [0, 1], [0, 1], c=2)
    with pytest.raises(ValueError):
        d.features[0, 0] = 1.0
