"""Group-based random waypoint mobility on a bounded plane."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .positioning import Position

NS = 1_000_000_000


@dataclass
class MobilityState:
    x: float
    y: float
    wx: float
    wy: float
    speed: float
    pause_until_ns: int
    group: int

    @property
    def true_position(self):
        return Position(self.x, self.y)

    @property
    def waypoint(self):
        return Position(self.wx, self.wy)


def _draw_leg(state, g, bounds, rng):
    w, h = bounds
    state.wx = float(rng.uniform(0.0, w))
    state.wy = float(rng.uniform(0.0, h))
    state.speed = float(rng.uniform(g.speed_min, g.speed_max))


def init_nodes(groups, bounds, rng):
    """One MobilityState per node, groups laid out in order.

    Node ids are the list indices, so group membership is stable per run.
    """
    w, h = bounds
    if w <= 0 or h <= 0:
        raise ValueError("bounds must be positive")
    states = []
    for gi, g in enumerate(groups):
        for _ in range(g.count):
            x, y = float(rng.uniform(0.0, w)), float(rng.uniform(0.0, h))
            s = MobilityState(x, y, x, y, 0.0, 0, gi)
            _draw_leg(s, g, bounds, rng)
            states.append(s)
    return states


def advance(state, now_ns, dt_ns, groups, bounds, rng):
    """Move one node from ``now_ns`` to ``now_ns + dt_ns``.

    A paused node holds still while ``now_ns < pause_until_ns``. A moving
    node stops exactly on its waypoint; arrival draws the pause and the next
    leg in one go.
    """
    if now_ns < state.pause_until_ns:
        return state
    dx = state.wx - state.x
    dy = state.wy - state.y
    dist = math.hypot(dx, dy)
    step = state.speed * (dt_ns / NS)
    if step < dist:
        f = step / dist
        state.x += dx * f
        state.y += dy * f
        return state
    state.x, state.y = state.wx, state.wy
    g = groups[state.group]
    pause = float(rng.uniform(g.pause_min, g.pause_max))
    state.pause_until_ns = now_ns + dt_ns + round(pause * NS)
    _draw_leg(state, g, bounds, rng)
    return state
