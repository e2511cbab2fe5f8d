"""Time-stepped DTN world: mobility, links, buffers, transfers and routers.

Time is kept in integer nanoseconds so transfer completions land exactly
on ``start + 8 * size / bandwidth`` and logs are reproducible byte for byte.

Inside one step at time ``t`` the engine:

1. moves every node,
2. completes transfers due by ``t`` (chaining the next queued message on
   that link when the completion falls strictly before ``t``),
3. purges expired messages and ACKs,
4. takes GPS samples when ``t`` is on the sampling grid,
5. updates links; dropped links abort transfers, new links run the
   router's encounter logic in ascending node-pair order,
6. injects new traffic,
7. starts transfers on every idle directed link with queued work.
"""

from __future__ import annotations

import heapq
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import split_router
from .events import NS, SimEvent, sort_events
from .mobility import advance, init_nodes
from .positioning import Position, sample_positions
from .routers import RoutingState, get_planner, record_delivery_ack, summarize


class Message(NamedTuple):
    id: int
    src: int
    dst: int
    size: int
    created_ns: int
    ttl_ns: int

    @property
    def expiry_ns(self):
        return self.created_ns + self.ttl_ns


class Link(NamedTuple):
    a: int
    b: int
    established_ns: int


@dataclass
class Transfer:
    msg: Message
    sender: int
    receiver: int
    started_ns: int
    completes_ns: int
    phase: str = "spread"


def transfer_duration_ns(size_bytes, bandwidth_bps):
    """Exact ``8 * size / bandwidth`` in ns, rounded up to the next ns."""
    return -(-size_bytes * 8 * NS // bandwidth_bps)


def schedule_transfer(sender, receiver, message, bandwidth_bps, now_ns):
    return Transfer(message, sender, receiver, now_ns, now_ns + transfer_duration_ns(message.size, bandwidth_bps))


class Buffer:
    """Fixed-capacity message store, ordered by time of receipt."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.messages = {}
        self.used = 0
        self.reserved = 0

    def __contains__(self, msg_id):
        return msg_id in self.messages

    def __len__(self):
        return len(self.messages)

    @property
    def free(self):
        return self.capacity - self.used - self.reserved

    def held(self):
        return list(self.messages.values())

    def make_room(self, size, busy=()):
        """Ids to drop (oldest received first) so ``size`` fits, or None."""
        if size > self.capacity:
            return None
        need = size - self.free
        drops = []
        if need <= 0:
            return drops
        for mid, m in self.messages.items():
            if mid in busy:
                continue
            drops.append(mid)
            need -= m.size
            if need <= 0:
                return drops
        return None

    def add(self, message):
        self.messages[message.id] = message
        self.used += message.size

    def remove(self, msg_id):
        m = self.messages.pop(msg_id)
        self.used -= m.size
        return m


def buffer_admit(buffer, message, busy=()):
    """Admit ``message``, evicting old non-transferring messages if needed.

    Returns ``(admitted, dropped_ids)``. A refused message leaves the buffer
    untouched, as does a duplicate id.
    """
    if message.id in buffer:
        return False, []
    drops = buffer.make_room(message.size, busy)
    if drops is None:
        return False, []
    for mid in drops:
        buffer.remove(mid)
    buffer.add(message)
    return True, drops


class LinkDetector:
    """Tracks the link set between steps; range boundary is inclusive."""

    def __init__(self, n_nodes, range_m):
        self.range_m = range_m
        self.ii, self.jj = np.triu_indices(n_nodes, k=1)
        self.mask = np.zeros(len(self.ii), dtype=bool)

    def links(self):
        idx = np.flatnonzero(self.mask)
        return set(zip(self.ii[idx].tolist(), self.jj[idx].tolist()))

    def update(self, xs, ys):
        """Return ``(up, down)`` pair lists, each in ascending pair order."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        mask = np.hypot(xs[self.ii] - xs[self.jj], ys[self.ii] - ys[self.jj]) <= self.range_m
        changed = np.flatnonzero(mask != self.mask)
        if len(changed) == 0:
            return [], []
        self.mask = mask
        up, down = [], []
        for k in changed.tolist():
            pair = (int(self.ii[k]), int(self.jj[k]))
            (up if mask[k] else down).append(pair)
        return up, down


def update_connectivity(positions, range_m, previous=frozenset()):
    """Links among ``positions`` (N x 2) at distance <= ``range_m``.

    Returns ``(links, up, down)``: the current pair set plus sorted lists of
    pairs that appeared and disappeared relative to ``previous``.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    det = LinkDetector(len(pos), range_m)
    det.update(pos[:, 0], pos[:, 1])
    links = det.links()
    previous = set(previous)
    return links, sorted(links - previous), sorted(previous - links)


def generate_traffic(rng, traffic, n_nodes, start_ns, end_ns, step_ns):
    """Yield messages with uniform gaps, endpoints and sizes.

    Creation times are snapped up to the step grid; nothing is created
    before ``start_ns`` or after ``end_ns``.
    """
    if n_nodes < 2:
        return
    t = start_ns
    ttl_ns = round(traffic.ttl_s * NS)
    mid = 0
    while True:
        gap = rng.uniform(traffic.interval_min_s, traffic.interval_max_s)
        t += round(gap * NS)
        created = -(-t // step_ns) * step_ns
        if created > end_ns:
            return
        src = int(rng.integers(n_nodes))
        dst = int(rng.integers(n_nodes))
        while dst == src:
            dst = int(rng.integers(n_nodes))
        size = int(rng.integers(traffic.size_min_bytes, traffic.size_max_bytes + 1))
        yield Message(mid, src, dst, size, created, ttl_ns)
        mid += 1


@dataclass
class Node:
    id: int
    mob: object
    routing: RoutingState
    buffer: Buffer
    neighbors: set = field(default_factory=set)
    sending: Counter = field(default_factory=Counter)
    incoming: dict = field(default_factory=dict)


class _LinkState:
    __slots__ = ("link", "queue", "active")

    def __init__(self, link):
        self.link = link
        self.queue = {link.a: deque(), link.b: deque()}
        self.active = {link.a: None, link.b: None}

    def peer(self, n):
        return self.link.b if n == self.link.a else self.link.a


@dataclass
class WorldSnapshot:
    time_ns: int
    steps: int
    positions: list
    centroids: list
    buffers: dict
    links: list
    messages: dict


def _seed_streams(seed):
    ss = np.random.SeedSequence(seed)
    mob, traffic, noise = ss.spawn(3)
    return np.random.default_rng(mob), np.random.default_rng(traffic), np.random.default_rng(noise)


class World:
    """One simulation run. Use :func:`run` unless you need to poke at state."""

    def __init__(self, config):
        config.validate()
        self.cfg = config
        self.dt_ns = round(config.timestep_s * NS)
        self.gps_ns = round(config.gps_interval_s * NS)
        self.end_ns = round(config.duration_s * NS)
        self.warmup_ns = round(config.warmup_s * NS)
        self.steps = self.end_ns // self.dt_ns
        self.bounds = (config.world_width_m, config.world_height_m)
        self.groups = list(config.node_groups)
        self.router = config.router
        self.base_router, _ = split_router(config.router)
        self.planner = get_planner(config.router)
        self.noise = config.effective_noise_m
        self.mob_rng, traffic_rng, self.noise_rng = _seed_streams(config.seed)

        states = init_nodes(self.groups, self.bounds, self.mob_rng)
        self.nodes = [Node(i, s, RoutingState(i), Buffer(config.buffer_bytes)) for i, s in enumerate(states)]
        self.links = {}
        self.detector = LinkDetector(len(self.nodes), config.transmit_range_m)
        self.events = []
        self.messages = {}
        self.expiry_heap = []
        self.pending = []  # (completes_ns, seq, transfer)
        self._seq = 0
        self.now = 0
        self.traffic = generate_traffic(
            traffic_rng, config.traffic, len(self.nodes), self.warmup_ns, self.end_ns, self.dt_ns
        )
        self._next_msg = next(self.traffic, None)

    # -- helpers ---------------------------------------------------------

    def emit(self, t, kind, *values):
        self.events.append(SimEvent(t, kind, values))


    def _link_of(self, a, b):
        return self.links[(a, b) if a < b else (b, a)]

    def _sample_gps(self):
        interval = self.cfg.gps_interval_s
        truth = [(n.mob.x, n.mob.y) for n in self.nodes]
        for n, s in zip(self.nodes, sample_positions(truth, self.noise, self.noise_rng)):
            n.routing.gps_update(s, interval)

    def _abort(self, ls, sender, t, reason):
        tr = ls.active[sender]
        if tr is None:
            return
        ls.active[sender] = None
        snd, rcv = self.nodes[tr.sender], self.nodes[tr.receiver]
        snd.sending[tr.msg.id] -= 1
        if snd.sending[tr.msg.id] <= 0:
            del snd.sending[tr.msg.id]
        rcv.incoming.pop(tr.msg.id, None)
        if tr.receiver != tr.msg.dst:
            rcv.buffer.reserved -= tr.msg.size
        self.emit(t, "TransferAborted", tr.msg.id, tr.sender, tr.receiver, reason)

    def learn_ack(self, node, msg_id, expiry_ns, t):
        if not record_delivery_ack(node.routing, msg_id, expiry_ns):
            return
        self.emit(t, "AckLearned", node.id, msg_id)
        if msg_id in node.buffer:
            node.buffer.remove(msg_id)
            self.emit(t, "MessageDropped", node.id, msg_id, "ack")
        for peer in sorted(node.neighbors):
            ls = self._link_of(node.id, peer)
            for sender in (node.id, peer):
                tr = ls.active[sender]
                if tr is not None and tr.msg.id == msg_id:
                    self._abort(ls, sender, t, "ack")

    def _offer_direct(self, node, msg, t):
        if msg.dst in node.neighbors:
            ls = self._link_of(node.id, msg.dst)
            ls.queue[node.id].append((msg.id, "direct", None))
            if t < self.now:
                self._try_start(ls, node.id, t)

    def _try_start(self, ls, sender_id, t):
        if ls.active[sender_id] is not None:
            return
        queue = ls.queue[sender_id]
        sender = self.nodes[sender_id]
        receiver = self.nodes[ls.peer(sender_id)]
        bw = self.cfg.bandwidth_bps
        while queue:
            mid, phase, prog = queue.popleft()
            msg = sender.buffer.messages.get(mid)
            if msg is None:
                continue
            if mid in receiver.routing.acks or mid in receiver.buffer or mid in receiver.incoming:
                continue
            tr = schedule_transfer(sender_id, receiver.id, msg, bw, t)
            if tr.completes_ns > msg.expiry_ns:
                continue
            if receiver.id != msg.dst:
                drops = receiver.buffer.make_room(msg.size, receiver.sending)
                if drops is None:
                    continue
                for d in drops:
                    receiver.buffer.remove(d)
                    self.emit(t, "MessageDropped", receiver.id, d, "buffer")
                receiver.buffer.reserved += msg.size
            receiver.incoming[mid] = msg.size
            sender.sending[mid] += 1
            tr.phase = phase
            ls.active[sender_id] = tr
            self._seq += 1
            heapq.heappush(self.pending, (tr.completes_ns, self._seq, tr))
            sd, rd = prog if prog is not None else ("na", "na")
            self.emit(t, "TransferStarted", mid, sender_id, receiver.id, phase, tr.completes_ns, sd, rd)
            return

    # -- step phases -------------------------------------------------------

    def _complete_transfers(self, t):
        while self.pending and self.pending[0][0] <= t:
            c, _, tr = heapq.heappop(self.pending)
            ls = self.links.get((min(tr.sender, tr.receiver), max(tr.sender, tr.receiver)))
            if ls is None or ls.active[tr.sender] is not tr:
                continue
            ls.active[tr.sender] = None
            snd, rcv = self.nodes[tr.sender], self.nodes[tr.receiver]
            msg = tr.msg
            snd.sending[msg.id] -= 1
            if snd.sending[msg.id] <= 0:
                del snd.sending[msg.id]
            rcv.incoming.pop(msg.id, None)
            self.emit(c, "TransferCompleted", msg.id, tr.sender, tr.receiver)
            if rcv.id == msg.dst:
                self.emit(c, "MessageDelivered", msg.id, tr.sender, tr.receiver)
                self.learn_ack(rcv, msg.id, msg.expiry_ns, c)
                self.learn_ack(snd, msg.id, msg.expiry_ns, c)
            else:
                rcv.buffer.reserved -= msg.size
                rcv.buffer.add(msg)
                self._offer_direct(rcv, msg, c)
            if c < t:
                self._try_start(ls, tr.sender, c)

    def _expire(self, t):
        while self.expiry_heap and self.expiry_heap[0][0] <= t:
            _, mid = heapq.heappop(self.expiry_heap)
            for n in self.nodes:
                if mid in n.buffer:
                    n.buffer.remove(mid)
                    self.emit(t, "MessageExpired", n.id, mid)
                n.routing.acks.pop(mid, None)

    def _encounter(self, a, b, t):
        na, nb = self.nodes[a], self.nodes[b]
        with_table = self.base_router == "centermass"
        sa = summarize(na.routing, na.buffer.messages.keys(), na.neighbors, t, with_table)
        sb = summarize(nb.routing, nb.buffer.messages.keys(), nb.neighbors, t, with_table)
        plan_a = self.planner(na.routing, na.buffer.held(), sb, t)
        plan_b = self.planner(nb.routing, nb.buffer.held(), sa, t)
        for node, peer_summary, peer in ((na, sb, nb), (nb, sa, na)):
            for mid in sorted(m for m in peer_summary.ack_ids if m not in node.routing.acks):
                self.learn_ack(node, mid, peer.routing.acks[mid], t)
        ls = self.links[(a, b)]
        for node, peer, plan in ((na, nb, plan_a), (nb, na, plan_b)):
            q = ls.queue[node.id]
            for mid, phase in plan.ordered():
                q.append((mid, phase, plan.progress.get(mid) if phase == "spread" else None))
            self.emit(t, "EncounterPlan", node.id, peer.id, plan.fraction, plan.queue_length, plan.limit, len(plan.spread))

    def _connectivity(self, t):
        up, down = self.detector.update([n.mob.x for n in self.nodes], [n.mob.y for n in self.nodes])
        if not up and not down:
            return
        for a, b in down:
            ls = self.links.pop((a, b))
            self._abort(ls, a, t, "link")
            self._abort(ls, b, t, "link")
            self.nodes[a].neighbors.discard(b)
            self.nodes[b].neighbors.discard(a)
            self.emit(t, "LinkDown", a, b)
        for a, b in up:
            self.links[(a, b)] = _LinkState(Link(a, b, t))
            self.nodes[a].neighbors.add(b)
            self.nodes[b].neighbors.add(a)
            self.emit(t, "LinkUp", a, b)
        for a, b in up:
            self._encounter(a, b, t)

    def _inject_traffic(self, t):
        while self._next_msg is not None and self._next_msg.created_ns <= t:
            msg = self._next_msg
            self._next_msg = next(self.traffic, None)
            self.messages[msg.id] = msg
            heapq.heappush(self.expiry_heap, (msg.expiry_ns, msg.id))
            src = self.nodes[msg.src]
            self.emit(msg.created_ns, "MessageCreated", msg.id, msg.src, msg.dst, msg.size, msg.ttl_ns)
            ok, drops = buffer_admit(src.buffer, msg, src.sending)
            for d in drops:
                self.emit(t, "MessageDropped", src.id, d, "buffer")
            if not ok:
                self.emit(t, "MessageDropped", src.id, msg.id, "reject")
                continue
            self._offer_direct(src, msg, t)

    def _start_idle(self, t):
        for key in sorted(self.links):
            ls = self.links[key]
            for sender in key:
                if ls.active[sender] is None and ls.queue[sender]:
                    self._try_start(ls, sender, t)

    def step(self, k):
        t = k * self.dt_ns
        prev = t - self.dt_ns
        self.now = t
        for n in self.nodes:
            advance(n.mob, prev, self.dt_ns, self.groups, self.bounds, self.mob_rng)
        self._complete_transfers(t)
        self._expire(t)
        if t % self.gps_ns == 0:
            self._sample_gps()
        self._connectivity(t)
        self._inject_traffic(t)
        self._start_idle(t)

    def start(self):
        self.now = 0
        self._sample_gps()
        self._connectivity(0)
        self._inject_traffic(0)
        self._start_idle(0)

    def snapshot(self, steps):
        return WorldSnapshot(
            time_ns=self.now,
            steps=steps,
            positions=[Position(n.mob.x, n.mob.y) for n in self.nodes],
            centroids=[n.routing.centroid.centroid for n in self.nodes],
            buffers={n.id: list(n.buffer.messages) for n in self.nodes},
            links=sorted(self.links),
            messages=dict(self.messages),
        )

    def run(self):
        if self.steps == 0:
            return [], self.snapshot(0)
        self.start()
        for k in range(1, self.steps + 1):
            self.step(k)
        return sort_events(self.events), self.snapshot(self.steps)

    def meta(self):
        return {
            "router": self.router,
            "bandwidth_bps": self.cfg.bandwidth_bps,
            "buffer_bytes": self.cfg.buffer_bytes,
            "noise_m": _fmt_num(self.noise),
            "seed": self.cfg.seed,
            "warmup_s": _fmt_num(self.cfg.warmup_s),
            "duration_s": _fmt_num(self.cfg.duration_s),
            "nodes": len(self.nodes),
        }


def _fmt_num(x):
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def run(config):
    """Run one simulation. Returns ``(sorted event list, WorldSnapshot)``."""
    return World(config).run()


def run_with_meta(config):
    w = World(config)
    events, snap = w.run()
    return events, snap, w.meta()

