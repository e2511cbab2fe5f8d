"""Centroid and CenterMass DTN routing with a deterministic simulator."""

from .config import GroupConfig, SimConfig, TrafficConfig, desk_config, parse_config, city_config
from .metrics import MetricsReport, aggregate, compute_report
from .oracle import earliest_arrival, extract_contact_trace, oracle_report
from .positioning import Position, batch_centroid, update_centroid
from .sim import run

__all__ = [
    "GroupConfig",
    "MetricsReport",
    "Position",
    "SimConfig",
    "TrafficConfig",
    "aggregate",
    "batch_centroid",
    "compute_report",
    "desk_config",
    "earliest_arrival",
    "extract_contact_trace",
    "oracle_report",
    "parse_config",
    "run",
    "city_config",
    "update_centroid",
]
