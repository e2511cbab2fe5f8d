"""GPS sampling with uniform noise, running centroids and velocity estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional


class Position(NamedTuple):
    x: float
    y: float


def distance(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


class CentroidState:
    """Running mean of a node's GPS samples plus its longest centroid distance."""

    __slots__ = ("cx", "cy", "sample_count", "max_centroid_distance_m")

    def __init__(self, centroid=None, sample_count=0, max_centroid_distance_m=0.0):
        self.cx, self.cy = (0.0, 0.0) if centroid is None else (float(centroid[0]), float(centroid[1]))
        self.sample_count = sample_count if centroid is not None else 0
        self.max_centroid_distance_m = max_centroid_distance_m

    @property
    def centroid(self):
        if self.sample_count == 0:
            return None
        return Position(self.cx, self.cy)

    def observe_distance(self, d):
        if d > self.max_centroid_distance_m:
            self.max_centroid_distance_m = d

    def __repr__(self):
        return f"CentroidState(centroid={self.centroid}, sample_count={self.sample_count}, max_centroid_distance_m={self.max_centroid_distance_m})"


@dataclass(frozen=True)
class GpsSampler:
    interval_s: float = 1.0
    noise_amplitude_m: float = 0.0

    def __post_init__(self):
        if self.interval_s <= 0:
            raise ValueError("interval_s must be > 0")
        if self.noise_amplitude_m < 0:
            raise ValueError("noise_amplitude_m must be >= 0")

    def sample(self, true_position, rng):
        return sample_position(true_position, self.noise_amplitude_m, rng)


def sample_position(true_position, noise_amplitude_m, rng):
    """Return ``true_position`` displaced by independent U(-E, E) noise per axis.

    With ``E == 0`` the input is returned unchanged and ``rng`` is not touched.
    """
    if noise_amplitude_m < 0:
        raise ValueError("noise amplitude must be >= 0")
    if noise_amplitude_m == 0:
        return Position(float(true_position[0]), float(true_position[1]))
    ux, uy = rng.uniform(-noise_amplitude_m, noise_amplitude_m, size=2)
    return Position(true_position[0] + float(ux), true_position[1] + float(uy))


def sample_positions(true_positions, noise_amplitude_m, rng):
    """Vectorised :func:`sample_position` over a sequence of positions."""
    if noise_amplitude_m < 0:
        raise ValueError("noise amplitude must be >= 0")
    if noise_amplitude_m == 0:
        return [Position(float(x), float(y)) for x, y in true_positions]
    noise = rng.uniform(-noise_amplitude_m, noise_amplitude_m, size=(len(true_positions), 2)).tolist()
    return [Position(x + ux, y + uy) for (x, y), (ux, uy) in zip(true_positions, noise)]


def update_centroid(state, sample):
    """Fold one sample into the running centroid in place and return the state.

    Uses the incremental form ``C += (x_t - C) / t`` so no sample history
    is kept; the first sample initialises the centroid.
    """
    t = state.sample_count + 1
    state.cx += (sample[0] - state.cx) / t
    state.cy += (sample[1] - state.cy) / t
    state.sample_count = t
    return state


def batch_centroid(samples):
    samples = list(samples)
    if not samples:
        raise ValueError("batch_centroid needs at least one sample")
    n = len(samples)
    return Position(math.fsum(s[0] for s in samples) / n, math.fsum(s[1] for s in samples) / n)


def estimate_velocity(previous, current, interval_s):
    if interval_s <= 0:
        raise ValueError("interval_s must be > 0")
    return ((current[0] - previous[0]) / interval_s, (current[1] - previous[1]) / interval_s)
