import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noiselab.data import Dataset, SyntheticSpec, generate_synthetic
from noiselab.errors import ArgumentError, UsageError
from noiselab.noise import CorruptionRecord, NoiseSpec, inject_noise


def _clean(n=100, c=2, seed=0):
    return generate_synthetic(SyntheticSpec(n=n, c=c, feature_dim=3, cluster_spread=0.1, seed=seed))


def test_zero_rate_is_identity():
    d = _clean()
    noisy, rec = inject_noise(d, NoiseSpec("symmetric", 0.0, 1))
    np.testing.assert_array_equal(noisy.observed_labels, d.observed_labels)
    assert rec.realized_rate == 0 and not rec.flipped.any()


def test_binary_symmetric_forty_percent():
    d = _clean(100, 2)
    noisy, rec = inject_noise(d, NoiseSpec("symmetric", 0.4, 3))
    assert rec.n_flipped == 40 and rec.realized_rate == 0.4
    changed = noisy.observed_labels != d.observed_labels
    np.testing.assert_array_equal(changed, rec.flipped)
    np.testing.assert_array_equal(noisy.observed_labels[changed], 1 - d.observed_labels[changed])


def test_asymmetric_every_last_class_sample_wraps():
    d = Dataset(np.zeros((20, 1)), np.full(20, 8), np.full(20, 8), c=9)
    noisy, rec = inject_noise(d, NoiseSpec("asymmetric", 0.5, 4))
    assert rec.n_flipped == 10
    assert set(noisy.observed_labels[rec.flipped].tolist()) == {0}


def test_rate_bound_enforced():
    with pytest.raises(ArgumentError):
        inject_noise(_clean(c=2), NoiseSpec("symmetric", 0.5, 0))
    with pytest.raises(ArgumentError):
        NoiseSpec("symmetric", 1.0)
    with pytest.raises(ArgumentError):
        NoiseSpec("pairflip", 0.1)


def test_only_train_split():
    with pytest.raises(UsageError):
        inject_noise(_clean().with_split("validation"), NoiseSpec("symmetric", 0.1, 0))


def test_true_labels_preserved():
    d = _clean(50, 3)
    noisy, _ = inject_noise(d, NoiseSpec("symmetric", 0.3, 2))
    np.testing.assert_array_equal(noisy.true_labels, d.true_labels)


def test_record_json_round_trip(tmp_path):
    _, rec = inject_noise(_clean(), NoiseSpec("symmetric", 0.2, 8))
    rec.save(tmp_path / "r.json")
    back = CorruptionRecord.load(tmp_path / "r.json")
    np.testing.assert_array_equal(back.flipped, rec.flipped)
    np.testing.assert_array_equal(back.original_label, rec.original_label)
    assert back.realized_rate == rec.realized_rate


@settings(max_examples=40, deadline=None)
@given(n=st.integers(3, 80), c=st.integers(2, 6), frac=st.floats(0, 0.99), seed=st.integers(0, 2**40),
       kind=st.sampled_from(["symmetric", "asymmetric"]))
def test_noise_properties(n, c, frac, seed, kind):
    rate = frac * (c - 1) / c
    d = Dataset(np.zeros((n, 1)), np.arange(n) % c, np.arange(n) % c, c)
    noisy, rec = inject_noise(d, NoiseSpec(kind, rate, seed))
    assert rec.n_flipped == int(np.floor(rate * n + 0.5))
    assert rec.realized_rate == rec.n_flipped / n
    obs, orig = noisy.observed_labels, rec.original_label
    assert np.all(obs[rec.flipped] != orig[rec.flipped])
    # flipped XOR (observed == true) must be false everywhere
    assert not np.any(rec.flipped ^ (obs != noisy.true_labels))
    if kind == "asymmetric":
        assert np.all(obs[rec.flipped] == (orig[rec.flipped] + 1) % c)
    again, rec2 = inject_noise(d, NoiseSpec(kind, rate, seed))
    np.testing.assert_array_equal(again.observed_labels, obs)
    np.testing.assert_array_equal(rec2.flipped, rec.flipped)


def test_symmetric_targets_cover_other_classes():
    d = Dataset(np.zeros((600, 1)), np.zeros(600, int), np.zeros(600, int), c=4)
    noisy, rec = inject_noise(d, NoiseSpec("symmetric", 0.5, 1))
    counts = np.bincount(noisy.observed_labels[rec.flipped], minlength=4)
    assert counts[0] == 0
    assert all(abs(k - 100) < 40 for k in counts[1:])
