"""Offline best-case delivery from a run's contact trace.

The oracle ignores bandwidth and buffers: a message crosses a contact the
moment both ends are linked and the message exists, so its delivery count
bounds every online router that saw the same contacts.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from typing import NamedTuple

from .events import NS
from .metrics import MetricsReport, build_report


class Contact(NamedTuple):
    a: int
    b: int
    up_at: float
    down_at: float


class ContactTrace:
    def __init__(self, contacts=()):
        self.contacts = sorted(contacts)
        self.by_node = defaultdict(list)
        for c in self.contacts:
            if not c.up_at < c.down_at:
                raise ValueError(f"contact {c} needs up_at < down_at")
            self.by_node[c.a].append((c.b, c.up_at, c.down_at))
            self.by_node[c.b].append((c.a, c.up_at, c.down_at))

    def __len__(self):
        return len(self.contacts)

    def __iter__(self):
        return iter(self.contacts)


def extract_contact_trace(events, end_ns=None):
    """Pair each LinkUp with its LinkDown; open links close at ``end_ns``.

    Zero-length intervals (up and down in the same instant) carry nothing
    and are dropped.
    """
    open_links = {}
    contacts = []
    for ev in events:
        if ev.kind == "LinkUp":
            pair = ev.values
            if pair in open_links:
                raise ValueError(f"LinkUp for {pair} at {ev.time_ns} while already up")
            open_links[pair] = ev.time_ns
        elif ev.kind == "LinkDown":
            pair = ev.values
            if pair not in open_links:
                raise ValueError(f"LinkDown for {pair} at {ev.time_ns} without LinkUp")
            up = open_links.pop(pair)
            if ev.time_ns > up:
                contacts.append(Contact(pair[0], pair[1], up, ev.time_ns))
    if open_links:
        if end_ns is None:
            raise ValueError(f"{len(open_links)} links never went down and no end time was given")
        for pair, up in open_links.items():
            if end_ns > up:
                contacts.append(Contact(pair[0], pair[1], up, end_ns))
    return ContactTrace(contacts)


def earliest_arrival(trace, src, dst, t0, ttl, with_path=False):
    """Earliest time ``dst`` can hold a message created at ``src`` at ``t0``.

    Label-setting search over contact intervals: a node reached at ``tau``
    hands over on any contact with ``down_at >= tau`` at ``max(up_at, tau)``.
    Returns None when nothing arrives by ``t0 + ttl``; with ``with_path``
    returns ``(arrival, [(node, label), ...])`` instead.
    """
    deadline = t0 + ttl
    if src == dst:
        return (t0, [(src, t0)]) if with_path else t0
    best = {src: t0}
    prev = {}
    heap = [(t0, src)]
    while heap:
        tau, u = heapq.heappop(heap)
        if tau > best.get(u, float("inf")):
            continue
        if u == dst:
            break
        for v, up, down in trace.by_node.get(u, ()):
            if down < tau:
                continue
            a = up if up > tau else tau
            if a <= deadline and a < best.get(v, float("inf")):
                best[v] = a
                prev[v] = u
                heapq.heappush(heap, (a, v))
    arrival = best.get(dst)
    if not with_path:
        return arrival
    if arrival is None:
        return None
    path = [(dst, arrival)]
    node = dst
    while node != src:
        node = prev[node]
        path.append((node, best[node]))
    return arrival, path[::-1]


def oracle_report(trace, messages, time_scale=1):
    """Delivery figures if every message took its earliest-arrival path.

    ``messages`` are ``(src, dst, created, ttl)`` records (any object with
    those attributes or a 4-tuple). Latency is divided by ``time_scale`` to
    report seconds. Overhead is 0 by convention and efficacy is not
    applicable.
    """
    latencies = []
    created = 0
    for m in messages:
        src, dst, t0, ttl = _unpack(m)
        created += 1
        arr = earliest_arrival(trace, src, dst, t0, ttl)
        if arr is not None:
            latencies.append((arr - t0) / time_scale)
    base = build_report(created, len(latencies), 0, latencies)
    return MetricsReport(
        created=base.created,
        delivered=base.delivered,
        forwarded=0,
        delivery_probability=base.delivery_probability,
        avg_latency_s=base.avg_latency_s,
        overhead_ratio=0.0,
        efficacy=None,
    )


def _unpack(m):
    if hasattr(m, "created_ns"):
        return m.src, m.dst, m.created_ns, m.ttl_ns
    return tuple(m)


def messages_from_log(events, warmup_ns=0):
    out = []
    for ev in events:
        if ev.kind == "MessageCreated" and ev.time_ns >= warmup_ns:
            mid, src, dst, _size, ttl = ev.values
            out.append((src, dst, ev.time_ns, ttl))
    return out


def oracle_from_log(events, meta=None, end_ns=None):
    """Oracle report for a parsed event log (times in ns)."""
    meta = meta or {}
    if end_ns is None and "duration_s" in meta:
        end_ns = round(float(meta["duration_s"]) * NS)
    warmup_ns = round(float(meta.get("warmup_s", 0)) * NS)
    trace = extract_contact_trace(events, end_ns)
    return oracle_report(trace, messages_from_log(events, warmup_ns), time_scale=NS)
