"""Event records and the line-oriented event log format.

One event per line::

    <seconds> <Kind> key=value key=value ...

Timestamps are integer nanoseconds internally and are written with nine
decimals, so logs round-trip exactly. Field order is fixed per kind.
Lines starting with ``#`` carry run metadata.
"""

from __future__ import annotations

from typing import NamedTuple

NS = 1_000_000_000

# Tie-break rank at equal timestamps. Follows the order the engine handles
# things inside one step, so causes sort before their effects.
KIND_RANK = {
    "TransferCompleted": 0,
    "MessageDelivered": 1,
    "MessageExpired": 2,
    "TransferAborted": 3,
    "LinkDown": 4,
    "LinkUp": 5,
    "AckLearned": 6,
    "MessageCreated": 7,
    "MessageDropped": 8,
    "EncounterPlan": 9,
    "TransferStarted": 10,
}

FIELDS = {
    "MessageCreated": ("msg", "src", "dst", "size", "ttl"),
    "LinkUp": ("a", "b"),
    "LinkDown": ("a", "b"),
    "TransferStarted": ("msg", "from", "to", "phase", "completes", "sd", "rd"),
    "TransferCompleted": ("msg", "from", "to"),
    "TransferAborted": ("msg", "from", "to", "reason"),
    "MessageDelivered": ("msg", "from", "to"),
    "MessageDropped": ("node", "msg", "reason"),
    "MessageExpired": ("node", "msg"),
    "AckLearned": ("node", "msg"),
    "EncounterPlan": ("from", "to", "fraction", "queue", "limit", "spread"),
}

# Fields holding node ids, used for the tie-break after kind rank.
_NODE_FIELDS = {
    "MessageCreated": ("src", "dst"),
    "LinkUp": ("a", "b"),
    "LinkDown": ("a", "b"),
    "TransferStarted": ("from", "to"),
    "TransferCompleted": ("from", "to"),
    "TransferAborted": ("from", "to"),
    "MessageDelivered": ("from", "to"),
    "MessageDropped": ("node",),
    "MessageExpired": ("node",),
    "AckLearned": ("node",),
    "EncounterPlan": ("from", "to"),
}


class SimEvent(NamedTuple):
    time_ns: int
    kind: str
    values: tuple

    @property
    def t(self):
        return self.time_ns / NS

    def get(self, name):
        return self.values[FIELDS[self.kind].index(name)]

    def as_dict(self):
        return dict(zip(FIELDS[self.kind], self.values))

    def sort_key(self):
        idx = FIELDS[self.kind]
        nodes = tuple(self.values[idx.index(f)] for f in _NODE_FIELDS[self.kind])
        return (self.time_ns, KIND_RANK[self.kind], nodes)


def sort_events(events):
    """Total order: time, kind rank, node ids, then emission order."""
    return sorted(events, key=SimEvent.sort_key)


def format_time(ns):
    sign = "-" if ns < 0 else ""
    ns = abs(ns)
    return f"{sign}{ns // NS}.{ns % NS:09d}"


def parse_time(text):
    neg = text.startswith("-")
    if neg:
        text = text[1:]
    whole, _, frac = text.partition(".")
    if len(frac) > 9 or not whole.isdigit() or (frac and not frac.isdigit()):
        raise ValueError(f"bad timestamp {text!r}")
    ns = int(whole) * NS + int(frac.ljust(9, "0") or 0)
    return -ns if neg else ns


_TIME_FIELDS = ("completes", "ttl")


def _fmt_value(key, v):
    if key in _TIME_FIELDS:
        return format_time(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_event(ev):
    parts = [format_time(ev.time_ns), ev.kind]
    parts.extend(f"{k}={_fmt_value(k, v)}" for k, v in zip(FIELDS[ev.kind], ev.values))
    return " ".join(parts)


def _parse_value(key, raw):
    if key in _TIME_FIELDS:
        return parse_time(raw)
    if key in ("phase", "reason", "sd", "rd") and not _is_number(raw):
        return raw
    if key == "fraction" or key in ("sd", "rd"):
        return float(raw)
    try:
        return int(raw)
    except ValueError:
        return raw


def _is_number(raw):
    try:
        float(raw)
    except ValueError:
        return False
    return True


def parse_event(line):
    parts = line.split()
    if len(parts) < 2:
        raise ValueError(f"malformed event line {line!r}")
    time_ns = parse_time(parts[0])
    kind = parts[1]
    if kind not in FIELDS:
        raise ValueError(f"unknown event kind {kind!r}")
    names = FIELDS[kind]
    if len(parts) - 2 != len(names):
        raise ValueError(f"{kind}: expected fields {names}, got {parts[2:]}")
    values = []
    for name, token in zip(names, parts[2:]):
        key, sep, raw = token.partition("=")
        if not sep or key != name:
            raise ValueError(f"{kind}: expected field {name!r}, got {token!r}")
        values.append(_parse_value(key, raw))
    return SimEvent(time_ns, kind, tuple(values))


def format_log(events, meta=None):
    lines = []
    if meta:
        lines.append("# run " + " ".join(f"{k}={v}" for k, v in meta.items()))
    lines.extend(format_event(e) for e in events)
    return "\n".join(lines) + ("\n" if lines else "")


def parse_log(text):
    """Return ``(events, meta)`` from log text."""
    events, meta = [], {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].split()
            if body and body[0] == "run":
                for tok in body[1:]:
                    k, _, v = tok.partition("=")
                    meta[k] = v
            continue
        try:
            events.append(parse_event(line))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return events, meta
