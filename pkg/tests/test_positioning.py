import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centroid_dtn.positioning import (
    CentroidState,
    GpsSampler,
    Position,
    batch_centroid,
    estimate_velocity,
    sample_position,
    sample_positions,
    update_centroid,
)

coords = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)
points = st.tuples(coords, coords)


def fold(samples):
    s = CentroidState()
    for p in samples:
        update_centroid(s, p)
    return s


def test_zero_noise_is_identity():
    rng = np.random.default_rng(0)
    p = Position(12.5, -3.25)
    assert sample_position(p, 0.0, rng) == p


def test_noise_stays_in_box():
    rng = np.random.default_rng(1)
    truth = Position(100.0, 200.0)
    for _ in range(5000):
        s = sample_position(truth, 20.0, rng)
        assert abs(s.x - truth.x) <= 20.0 and abs(s.y - truth.y) <= 20.0


def test_noise_mean_converges():
    # 3 sigma of the mean of 1e5 U(-20, 20) draws: 3 * (20 / sqrt 3) / sqrt(1e5) ~= 0.11 m
    rng = np.random.default_rng(2)
    truth = (50.0, 50.0)
    s = np.array(sample_positions([truth] * 100_000, 20.0, rng))
    assert abs(s[:, 0].mean() - 50.0) < 0.25
    assert abs(s[:, 1].mean() - 50.0) < 0.25


def test_negative_amplitude_rejected():
    with pytest.raises(ValueError):
        sample_position((0, 0), -1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        GpsSampler(interval_s=1.0, noise_amplitude_m=-1)


def test_stationary_centroid():
    s = fold([(5.0, 5.0)] * 37)
    assert s.centroid == (5.0, 5.0)
    assert s.sample_count == 37


def test_small_sequence_centroid():
    assert fold([(0, 0), (2, 0), (4, 0)]).centroid == (2.0, 0.0)


def test_empty_state_has_no_centroid():
    assert CentroidState().centroid is None


def test_incremental_matches_batch_1000_samples():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-500, 500, size=(1000, 2)).tolist()
    got = fold(pts).centroid
    want = batch_centroid(pts)
    assert got.x == pytest.approx(want.x, rel=1e-9, abs=1e-9)
    assert got.y == pytest.approx(want.y, rel=1e-9, abs=1e-9)


@given(st.lists(points, min_size=1, max_size=200))
def test_incremental_equals_batch(samples):
    got = fold(samples)
    want = batch_centroid(samples)
    assert got.sample_count == len(samples)
    scale = max(1.0, max(abs(c) for p in samples for c in p))
    assert abs(got.centroid.x - want.x) <= 1e-9 * scale
    assert abs(got.centroid.y - want.y) <= 1e-9 * scale


def test_batch_centroid_basics():
    assert batch_centroid([(3.0, 4.0)]) == (3.0, 4.0)
    assert batch_centroid([(0, 0), (10, 10)]) == (5.0, 5.0)
    with pytest.raises(ValueError):
        batch_centroid([])


def test_noisy_centroid_converges_to_noiseless():
    rng = np.random.default_rng(4)
    track = [(0.1 * i, 3.0 + math.sin(i / 50)) for i in range(10_000)]
    clean = fold(track).centroid
    noisy = fold(sample_positions(track, 20.0, rng)).centroid
    assert math.dist(clean, noisy) < 1.0


@given(st.lists(st.floats(min_value=0, max_value=1e3), min_size=1, max_size=50))
def test_max_centroid_distance_never_decreases(ds):
    s = CentroidState()
    last = 0.0
    for d in ds:
        s.observe_distance(d)
        assert s.max_centroid_distance_m >= last
        last = s.max_centroid_distance_m


def test_velocity():
    assert estimate_velocity((3, 3), (3, 3), 1.0) == (0.0, 0.0)
    assert estimate_velocity((0, 0), (10, 0), 1.0) == (10.0, 0.0)
    with pytest.raises(ValueError):
        estimate_velocity((0, 0), (1, 1), 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_noise_velocity_of_stationary_node_bounded(seed):
    # Worst case is opposite corners of the +-E box: 2E * sqrt(2) per interval.
    rng = np.random.default_rng(seed)
    s = sample_positions([(0.0, 0.0)] * 200, 20.0, rng)
    speeds = [math.hypot(*estimate_velocity(a, b, 1.0)) for a, b in zip(s, s[1:])]
    assert max(speeds) <= 2 * 20.0 * math.sqrt(2)


def test_noise_velocity_reaches_tens_of_m_per_s():
    rng = np.random.default_rng(9)
    s = sample_positions([(0.0, 0.0)] * 20_000, 20.0, rng)
    top = max(math.hypot(*estimate_velocity(a, b, 1.0)) for a, b in zip(s, s[1:]))
    assert 45.0 < top <= 40 * math.sqrt(2)
