"""Parameter sweeps over router x axis value x seed, written as CSV."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .config import ConfigError, SimConfig, config_from_entries, parse_sections, split_router
from .events import format_log
from .metrics import aggregate, compute_report
from .sim import run_with_meta

COLUMNS = (
    "router",
    "bandwidth_bps",
    "buffer_bytes",
    "noise_m",
    "seed",
    "created",
    "delivered",
    "forwarded",
    "delivery_prob",
    "avg_latency_s",
    "overhead",
    "efficacy",
)
AXES = ("bandwidth_bps", "buffer_bytes", "noise_amplitude_m")
_REPORT_COLUMNS = {
    "created": "created",
    "delivered": "delivered",
    "forwarded": "forwarded",
    "delivery_prob": "delivery_probability",
    "avg_latency_s": "avg_latency_s",
    "overhead": "overhead_ratio",
    "efficacy": "efficacy",
}


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    base: SimConfig
    axis: str
    values: tuple
    routers: tuple
    seeds: tuple

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {', '.join(AXES)}")
        if not self.values or not self.routers or not self.seeds:
            raise ConfigError("values, routers and seeds must be non-empty")
        for r in self.routers:
            split_router(r)

    def cells(self):
        """``(router, value)`` pairs in output order."""
        return [(r, v) for r in self.routers for v in self.values]

    def config_for(self, router, value, seed):
        return replace(self.base, router=router, seed=seed, **{self.axis: value})


def _split_list(raw, lineno):
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"line {lineno}: empty list")
    return items


def _parse_seeds(raw, lineno):
    seeds = []
    for item in _split_list(raw, lineno):
        lo, sep, hi = item.partition("-")
        try:
            if sep:
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(item))
        except ValueError:
            raise ConfigError(f"line {lineno}: bad seed list {raw!r}") from None
    return tuple(seeds)


def parse_sweep(text):
    """Sweep spec: config keys at top level plus a ``[sweep]`` section.

    ``[sweep]`` takes ``axis``, ``values``, ``routers`` (comma lists) and
    ``seeds`` (comma list, ranges like ``0-3`` allowed).
    """
    entries = parse_sections(text)
    config_entries = [e for e in entries if e[0] != "sweep"]
    sweep = {}
    for _, key, value, lineno in (e for e in entries if e[0] == "sweep"):
        if key == "axis":
            sweep["axis"] = value
        elif key == "values":
            kind = float if sweep.get("axis") == "noise_amplitude_m" else int
            try:
                sweep["values"] = tuple(kind(float(v)) for v in _split_list(value, lineno))
            except ValueError:
                raise ConfigError(f"line {lineno}: bad values {value!r}") from None
        elif key == "routers":
            sweep["routers"] = tuple(_split_list(value, lineno))
        elif key == "seeds":
            sweep["seeds"] = _parse_seeds(value, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown sweep key {key!r}")
    missing = {"axis", "values", "routers", "seeds"} - set(sweep)
    if missing:
        raise ConfigError(f"[sweep] missing {', '.join(sorted(missing))}")
    if sweep["axis"] == "noise_amplitude_m":
        sweep["values"] = tuple(float(v) for v in sweep["values"])
    base = config_from_entries(config_entries)
    return SweepSpec(base=base, **sweep)


@dataclass
class CellResult:
    config: SimConfig
    report: object
    meta: dict
    log: str = ""
    events: list = None


def run_cell(config, keep_events=False, keep_log=False):
    events, _, meta = run_with_meta(config)
    report = compute_report(events, config.warmup_s)
    return CellResult(
        config=config,
        report=report,
        meta=meta,
        log=format_log(events, meta) if keep_log else "",
        events=events if keep_events else None,
    )


def _fmt(x):
    if x is None:
        return "undefined"
    if isinstance(x, int):
        return str(x)
    return f"{x:.6f}"


def report_row(meta, report):
    row = {
        "router": meta["router"],
        "bandwidth_bps": meta["bandwidth_bps"],
        "buffer_bytes": meta["buffer_bytes"],
        "noise_m": meta["noise_m"],
        "seed": meta["seed"],
    }
    for col, attr in _REPORT_COLUMNS.items():
        row[col] = _fmt(getattr(report, attr))
    if report.efficacy is None:
        row["efficacy"] = "na"
    return row


def aggregate_row(meta, reports):
    agg = aggregate(reports)
    row = {
        "router": meta["router"],
        "bandwidth_bps": meta["bandwidth_bps"],
        "buffer_bytes": meta["buffer_bytes"],
        "noise_m": meta["noise_m"],
        "seed": f"agg{len(reports)}",
    }
    for col, attr in _REPORT_COLUMNS.items():
        est = agg[attr]
        if est.mean is None:
            row[col] = "undefined"
        elif est.half_width is None:
            row[col] = f"{est.mean:.6f}"
        else:
            row[col] = f"{est.mean:.6f}+-{est.half_width:.6f}"
    return row


def write_csv(rows, fh=None):
    out = fh or io.StringIO()
    w = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return out.getvalue() if fh is None else None


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: dict  # (router, value) -> [CellResult per seed]

    def rows(self):
        """Per-seed rows for every cell, then one aggregate row per cell."""
        per_seed, aggs = [], []
        for key in self.spec.cells():
            results = self.cells[key]
            per_seed.extend(report_row(c.meta, c.report) for c in results)
            aggs.append(aggregate_row(results[0].meta, [c.report for c in results]))
        return per_seed + aggs

    def csv(self):
        return write_csv(self.rows())


def _run_job(args):
    config, keep_events, keep_log = args
    try:
        return run_cell(config, keep_events, keep_log)
    except Exception as exc:  # re-raised with the failing cell named
        return exc


def run_sweep(spec, workers=1, keep_events=False, keep_logs=False):
    """Run every (router, value, seed) cell; output order never depends on scheduling."""
    jobs = []
    for router, value in spec.cells():
        for seed in spec.seeds:
            jobs.append(((router, value, seed), spec.config_for(router, value, seed)))
    payload = [(cfg, keep_events, keep_logs) for _, cfg in jobs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, payload))
    else:
        results = [_run_job(p) for p in payload]
    cells = {}
    for (key, _), res in zip(jobs, results):
        router, value, seed = key
        if isinstance(res, Exception):
            raise SweepError(f"cell router={router} {spec.axis}={value} seed={seed} failed: {res}") from res
        cells.setdefault((router, value), []).append(res)
    return SweepResult(spec, cells)
