"""Encounter-driven DTN routers: Centroid, CenterMass, Vector and Epidemic.

Every router turns one side of an encounter into a :class:`TransferPlan`.
The phases are always the same: purge copies the peer reports as ACK'd,
hand over messages addressed to the peer, then messages addressed to the
peer's current neighbors, and finally a limited spread of everything else.
Only the spread phase is rate limited, and the routers differ only in how
they size and filter it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .config import split_router
from .positioning import CentroidState, Position, distance, estimate_velocity, update_centroid

MIN_SPEED = 1e-6


@dataclass
class RoutingState:
    """Per-node routing memory."""

    node: int
    centroid: CentroidState = field(default_factory=CentroidState)
    acks: dict = field(default_factory=dict)  # msg id -> expiry ns
    table: dict = field(default_factory=dict)  # node -> (Position, observed_at ns)
    last_sample: Optional[Position] = None
    velocity: tuple = (0.0, 0.0)

    def gps_update(self, sample, interval_s):
        update_centroid(self.centroid, sample)
        if self.last_sample is not None:
            self.velocity = estimate_velocity(self.last_sample, sample, interval_s)
        self.last_sample = sample

    def prune_acks(self, now_ns):
        stale = [m for m, exp in self.acks.items() if exp <= now_ns]
        for m in stale:
            del self.acks[m]
        return stale


@dataclass
class EncounterSummary:
    node: int
    centroid: Optional[Position]
    message_ids: frozenset
    ack_ids: frozenset
    neighbors: frozenset
    velocity: tuple = (0.0, 0.0)
    table: Optional[dict] = None


@dataclass
class TransferPlan:
    ack_purge: list = field(default_factory=list)
    direct: list = field(default_factory=list)
    neighbor: list = field(default_factory=list)
    spread: list = field(default_factory=list)
    limit: int = 0
    fraction: float = 1.0
    queue_length: int = 0
    # msg id -> (host-to-dest, peer-to-dest) centroid distances, CenterMass only
    progress: dict = field(default_factory=dict)

    def ordered(self):
        """``[(msg_id, phase), ...]`` in transmission order."""
        out = [(m, "direct") for m in self.direct]
        out += [(m, "neighbor") for m in self.neighbor]
        out += [(m, "spread") for m in self.spread]
        return out


def summarize(state, message_ids, neighbors, now_ns, with_table=False):
    table = None
    if with_table:
        table = dict(state.table)
        if state.centroid.centroid is not None:
            table[state.node] = (state.centroid.centroid, now_ns)
    return EncounterSummary(
        node=state.node,
        centroid=state.centroid.centroid,
        message_ids=frozenset(message_ids),
        ack_ids=frozenset(state.acks),
        neighbors=frozenset(neighbors),
        velocity=state.velocity,
        table=table,
    )


def record_delivery_ack(state, msg_id, expiry_ns):
    """Remember ``msg_id`` as delivered. Returns True if it was new.

    The caller purges any buffered copy; the ACK keeps the id from being
    accepted or forwarded again until it is pruned at message expiry.
    """
    if msg_id in state.acks:
        return False
    state.acks[msg_id] = expiry_ns
    return True


def centroid_fraction(distance_m, max_distance_m):
    if distance_m < 0:
        raise ValueError("distance must be >= 0")
    if max_distance_m <= 0:
        return 1.0
    return min(1.0, max(0.0, distance_m / max_distance_m))


def message_limit(fraction, queue_length):
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    return math.floor(fraction * queue_length)


def vector_fraction(host_velocity, peer_velocity):
    """|sin| of the angle between two velocity vectors; 1 if either is ~zero."""
    hx, hy = host_velocity
    px, py = peer_velocity
    nh = math.hypot(hx, hy)
    np_ = math.hypot(px, py)
    if nh < MIN_SPEED or np_ < MIN_SPEED:
        return 1.0
    s = abs(hx * py - hy * px) / (nh * np_)
    return min(1.0, s)


def merge_centroid_tables(mine, theirs):
    merged = dict(mine)
    for node, entry in theirs.items():
        cur = merged.get(node)
        if cur is None or entry[1] > cur[1]:
            merged[node] = entry
    return merged


def centermass_forward_filter(self_centroid, peer_centroid, dest_centroid):
    return distance(peer_centroid, dest_centroid) < distance(self_centroid, dest_centroid)


def _base_phases(held, peer):
    """Split ``held`` (messages in buffer order) into phases 1-3 and spread candidates."""
    plan = TransferPlan()
    kept = []
    for m in held:
        if m.id in peer.ack_ids:
            plan.ack_purge.append(m.id)
        else:
            kept.append(m)
    candidates = []
    for m in kept:
        if m.dst == peer.node:
            plan.direct.append(m.id)
        elif m.id in peer.message_ids:
            continue
        elif m.dst in peer.neighbors:
            plan.neighbor.append(m.id)
        else:
            candidates.append(m)
    candidates.sort(key=lambda m: (m.created_ns, m.id))
    plan.queue_length = len(kept)
    return plan, candidates


def _centroid_distance_fraction(host, peer):
    own = host.centroid
    if own.centroid is None or peer.centroid is None:
        return 1.0
    d = distance(own.centroid, peer.centroid)
    frac = centroid_fraction(d, own.max_centroid_distance_m)
    own.observe_distance(d)
    return frac


def _limited(plan, candidates, fraction):
    plan.fraction = fraction
    plan.limit = message_limit(fraction, plan.queue_length)
    plan.spread = [m.id for m in candidates[: plan.limit]]
    return plan


def centroid_on_encounter(host, held, peer, now_ns=0):
    plan, candidates = _base_phases(held, peer)
    return _limited(plan, candidates, _centroid_distance_fraction(host, peer))


def centermass_on_encounter(host, held, peer, now_ns=0):
    """Centroid plan whose spread phase only moves messages toward their destination.

    Side effect: the host merges the peer's centroid table into its own.
    A destination with no known centroid falls back to unfiltered spreading.
    """
    if peer.table:
        host.table = merge_centroid_tables(host.table, peer.table)
    if peer.centroid is not None:
        host.table = merge_centroid_tables(host.table, {peer.node: (peer.centroid, now_ns)})
    plan, candidates = _base_phases(held, peer)
    fraction = _centroid_distance_fraction(host, peer)
    own = host.centroid.centroid
    kept = []
    for m in candidates:
        dest = host.table.get(m.dst)
        if dest is None or own is None or peer.centroid is None:
            kept.append(m)
            continue
        sd = distance(own, dest[0])
        rd = distance(peer.centroid, dest[0])
        if rd < sd:
            kept.append(m)
            plan.progress[m.id] = (sd, rd)
    _limited(plan, kept, fraction)
    plan.progress = {m: plan.progress[m] for m in plan.spread if m in plan.progress}
    return plan


def vector_on_encounter(host, held, peer, now_ns=0):
    plan, candidates = _base_phases(held, peer)
    return _limited(plan, candidates, vector_fraction(host.velocity, peer.velocity))


def epidemic_on_encounter(host, held, peer, now_ns=0):
    plan, candidates = _base_phases(held, peer)
    plan.fraction = 1.0
    plan.limit = len(candidates)
    plan.spread = [m.id for m in candidates]
    return plan


PLANNERS = {
    "centroid": centroid_on_encounter,
    "centermass": centermass_on_encounter,
    "vector": vector_on_encounter,
    "epidemic": epidemic_on_encounter,
}


def get_planner(name):
    base, _ = split_router(name)
    return PLANNERS[base]
