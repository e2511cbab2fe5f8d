"""Reduce event logs to delivery, latency, overhead and efficacy figures."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, fields
from typing import Optional

from scipy import stats

from .events import NS


@dataclass(frozen=True)
class MetricsReport:
    created: int
    delivered: int
    forwarded: int
    delivery_probability: float
    avg_latency_s: Optional[float]
    overhead_ratio: Optional[float]  # None: undefined (nothing delivered)
    efficacy: Optional[float]  # None: not applicable (oracle)


def overhead_ratio(forwarded, delivered):
    if delivered == 0:
        return None
    return (forwarded - delivered) / delivered


def efficacy(delivery_probability, overhead):
    """Delivery probability over overhead, with the overhead floored at 1.

    Zero delivery (and so undefined overhead) gives 0.
    """
    if delivery_probability == 0 or overhead is None:
        return 0.0
    return delivery_probability / max(overhead, 1.0)


def build_report(created, delivered, forwarded, latencies):
    dp = delivered / created if created else 0.0
    lat = math.fsum(latencies) / len(latencies) if latencies else None
    ov = overhead_ratio(forwarded, delivered)
    return MetricsReport(created, delivered, forwarded, dp, lat, ov, efficacy(dp, ov))


def compute_report(events, warmup_s=0.0):
    warmup_ns = round(warmup_s * NS)
    created_at = {}
    first_delivery = {}
    forwarded = 0
    for ev in events:
        kind = ev.kind
        if kind == "MessageCreated":
            if ev.time_ns >= warmup_ns:
                created_at[ev.values[0]] = ev.time_ns
        elif kind == "TransferCompleted":
            if ev.time_ns >= warmup_ns:
                forwarded += 1
        elif kind == "MessageDelivered":
            mid = ev.values[0]
            if mid in created_at and mid not in first_delivery:
                first_delivery[mid] = ev.time_ns
    latencies = [(t - created_at[m]) / NS for m, t in first_delivery.items()]
    return build_report(len(created_at), len(first_delivery), forwarded, latencies)


METRIC_FIELDS = tuple(f.name for f in fields(MetricsReport))


@dataclass(frozen=True)
class Estimate:
    mean: Optional[float]
    half_width: Optional[float]  # None when fewer than two values
    n: int


def mean_ci(values, confidence=0.95):
    vals = [v for v in values if v is not None]
    n = len(vals)
    if n == 0:
        return Estimate(None, None, 0)
    mean = math.fsum(vals) / n
    if n < 2:
        return Estimate(mean, None, n)
    sd = statistics.stdev(vals)
    t = stats.t.ppf(0.5 + confidence / 2, n - 1)
    return Estimate(mean, float(t * sd / math.sqrt(n)), n)


def aggregate(reports, confidence=0.95):
    """Mean and Student-t half-width per metric, keyed by field name."""
    return {name: mean_ci([getattr(r, name) for r in reports], confidence) for name in METRIC_FIELDS}
