"""Replay checks over finished event logs.

Each checker returns a list of human-readable violations; empty means clean.
"""

from __future__ import annotations

import math
from collections import defaultdict
from itertools import groupby

from .sim import transfer_duration_ns


def _sizes(events):
    return {ev.values[0]: (ev.values[3], ev.time_ns + ev.values[4], ev.values[2]) for ev in events if ev.kind == "MessageCreated"}


def check_buffers(events, capacity, step_ns=None):
    """Replayed occupancy never exceeds ``capacity`` at the end of a timestamp.

    With ``step_ns``, also flags copies still held more than one step past
    their expiry.
    """
    info = _sizes(events)
    held = defaultdict(dict)
    bad = []
    for t, group in groupby(events, key=lambda e: e.time_ns):
        touched = set()
        for ev in group:
            k = ev.kind
            if k == "MessageCreated":
                held[ev.values[1]][ev.values[0]] = ev.values[3]
                touched.add(ev.values[1])
            elif k == "TransferCompleted":
                mid, _, rcv = ev.values
                if rcv != info[mid][2]:
                    held[rcv][mid] = info[mid][0]
                    touched.add(rcv)
            elif k in ("MessageDropped", "MessageExpired"):
                node, mid = ev.values[0], ev.values[1]
                if held[node].pop(mid, None) is None:
                    bad.append(f"t={t}: node {node} dropped {mid} it did not hold")
        for node in sorted(touched):
            used = sum(held[node].values())
            if used > capacity:
                bad.append(f"t={t}: node {node} holds {used} > {capacity} bytes")
        if step_ns is not None:
            for node, msgs in held.items():
                for mid in msgs:
                    if t > info[mid][1] + step_ns:
                        bad.append(f"t={t}: node {node} still holds expired {mid}")
    return bad


def check_ttl(events):
    info = _sizes(events)
    return [
        f"t={ev.time_ns}: message {ev.values[0]} delivered after expiry"
        for ev in events
        if ev.kind == "MessageDelivered" and ev.time_ns > info[ev.values[0]][1]
    ]


def check_transfers(events, bandwidth_bps=None):
    """Completions match exactly one open start; timing matches bandwidth."""
    info = _sizes(events)
    open_ = {}
    bad = []
    for ev in events:
        k = ev.kind
        if k == "TransferStarted":
            key = ev.values[:3]
            if key in open_:
                bad.append(f"t={ev.time_ns}: transfer {key} started twice")
            open_[key] = ev
            if bandwidth_bps is not None:
                want = ev.time_ns + transfer_duration_ns(info[key[0]][0], bandwidth_bps)
                if ev.values[4] != want:
                    bad.append(f"t={ev.time_ns}: transfer {key} completes at {ev.values[4]}, expected {want}")
        elif k in ("TransferCompleted", "TransferAborted"):
            key = ev.values[:3]
            start = open_.pop(key, None)
            if start is None:
                bad.append(f"t={ev.time_ns}: {k} {key} without TransferStarted")
            elif k == "TransferCompleted" and ev.time_ns != start.values[4]:
                bad.append(f"t={ev.time_ns}: {key} completed off schedule")
    return bad


def check_links(events):
    """Links are stored as ordered pairs and strictly alternate up/down."""
    state = {}
    bad = []
    for ev in events:
        if ev.kind in ("LinkUp", "LinkDown"):
            a, b = ev.values
            if not a < b:
                bad.append(f"t={ev.time_ns}: link ({a},{b}) not normalised")
            up = ev.kind == "LinkUp"
            if state.get((a, b), False) == up:
                bad.append(f"t={ev.time_ns}: {ev.kind} ({a},{b}) repeated")
            state[(a, b)] = up
    return bad


def check_spread_limit(events):
    """Spread-phase starts per directed encounter stay within the plan limit."""
    plans = {}
    counts = defaultdict(int)
    bad = []

    def close(key):
        plan = plans.pop(key, None)
        if plan is not None and counts[key] > plan[2]:
            bad.append(f"encounter {key}: {counts[key]} spread transfers > limit {plan[2]}")
        counts.pop(key, None)

    for ev in events:
        k = ev.kind
        if k == "EncounterPlan":
            frm, to, fraction, queue, limit, spread = ev.values
            key = (frm, to)
            close(key)
            plans[key] = (fraction, queue, limit)
            if not 0.0 <= fraction <= 1.0:
                bad.append(f"t={ev.time_ns}: fraction {fraction} outside [0, 1]")
            if limit > math.floor(fraction * queue):
                bad.append(f"t={ev.time_ns}: limit {limit} > floor({fraction} * {queue})")
            if spread > limit:
                bad.append(f"t={ev.time_ns}: planned spread {spread} > limit {limit}")
        elif k == "TransferStarted" and ev.values[3] == "spread":
            key = (ev.values[1], ev.values[2])
            if key not in plans:
                bad.append(f"t={ev.time_ns}: spread transfer {key} outside an encounter")
            counts[key] += 1
        elif k == "LinkDown":
            a, b = ev.values
            close((a, b))
            close((b, a))
    for key in list(plans):
        close(key)
    return bad


def check_centermass_progress(events):
    """Every annotated spread transfer moves strictly closer to the destination centroid."""
    bad = []
    for ev in events:
        if ev.kind == "TransferStarted" and ev.values[3] == "spread":
            sd, rd = ev.values[5], ev.values[6]
            if sd == "na":
                continue
            if not rd < sd:
                bad.append(f"t={ev.time_ns}: msg {ev.values[0]} {ev.values[1]}->{ev.values[2]} rd={rd} sd={sd}")
    return bad


def check_ack_hygiene(events):
    """No node starts sending a message after it has learned that message's ACK."""
    learned = set()
    bad = []
    for ev in events:
        if ev.kind == "AckLearned":
            learned.add(ev.values)
        elif ev.kind == "TransferStarted":
            if (ev.values[1], ev.values[0]) in learned:
                bad.append(f"t={ev.time_ns}: node {ev.values[1]} sent acked message {ev.values[0]}")
    return bad


def check_all(events, capacity, bandwidth_bps=None, step_ns=None, centermass=False):
    out = {
        "buffer": check_buffers(events, capacity, step_ns),
        "ttl": check_ttl(events),
        "transfers": check_transfers(events, bandwidth_bps),
        "links": check_links(events),
        "spread_limit": check_spread_limit(events),
        "ack_hygiene": check_ack_hygiene(events),
    }
    if centermass:
        out["centermass_progress"] = check_centermass_progress(events)
    return out
