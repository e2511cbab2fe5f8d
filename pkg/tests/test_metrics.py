import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from centroid_dtn.events import NS, SimEvent
from centroid_dtn.metrics import MetricsReport, aggregate, compute_report, efficacy, mean_ci, overhead_ratio


def test_overhead_example():
    assert overhead_ratio(30, 10) == 2.0
    assert overhead_ratio(5, 0) is None


def test_efficacy_anchors():
    assert efficacy(1.0, 1.0) == 1.0
    assert efficacy(0.0, None) == 0.0
    assert efficacy(0.0, 3.0) == 0.0
    assert efficacy(0.5, 4.0) == 0.125


@given(st.floats(0, 1), st.floats(0, 1))
def test_efficacy_equals_delivery_when_overhead_small(dp, ov):
    assert efficacy(dp, ov) == dp


def log(*items):
    return [SimEvent(round(t * NS), k, v) for t, k, v in items]


def test_compute_report_counts():
    ev = log(
        (5, "MessageCreated", (0, 0, 1, 10, 100 * NS)),  # before warmup, ignored
        (20, "MessageCreated", (1, 0, 2, 10, 100 * NS)),
        (30, "MessageCreated", (2, 1, 2, 10, 100 * NS)),
        (40, "TransferCompleted", (1, 0, 3)),
        (50, "TransferCompleted", (1, 3, 2)),
        (50, "MessageDelivered", (1, 3, 2)),
        (60, "TransferCompleted", (1, 0, 2)),
        (60, "MessageDelivered", (1, 0, 2)),  # duplicate delivery
    )
    r = compute_report(ev, warmup_s=10)
    assert (r.created, r.delivered, r.forwarded) == (2, 1, 3)
    assert r.delivery_probability == 0.5
    assert r.avg_latency_s == 30.0
    assert r.overhead_ratio == 2.0
    assert r.efficacy == 0.25
    assert compute_report(ev, warmup_s=10) == r


def test_nothing_delivered():
    ev = log((20, "MessageCreated", (1, 0, 2, 10, 100 * NS)), (25, "TransferCompleted", (1, 0, 3)))
    r = compute_report(ev)
    assert r.overhead_ratio is None and r.efficacy == 0.0 and r.avg_latency_s is None


def test_ci_example():
    # t(0.975, 3) = 3.18245, s = 1.29099, s / sqrt(4) = 0.645497
    est = mean_ci([1, 2, 3, 4])
    assert est.mean == 2.5
    assert est.half_width == pytest.approx(3.182446 * 0.645497, abs=1e-4)
    assert est.half_width == pytest.approx(2.054, abs=1e-3)


def test_ci_degenerate():
    assert mean_ci([7.0, 7.0, 7.0]).half_width == 0.0
    one = mean_ci([3.0])
    assert one.mean == 3.0 and one.half_width is None


def test_aggregate_per_metric():
    reps = [MetricsReport(10, d, 20, d / 10, 100.0, None if d == 0 else (20 - d) / d, 0.1) for d in (2, 4, 5, 5)]
    agg = aggregate(reps)
    assert agg["created"].mean == 10 and agg["created"].half_width == 0
    assert agg["delivered"].mean == 4 and agg["delivered"].n == 4
    assert math.isfinite(agg["overhead_ratio"].half_width)
