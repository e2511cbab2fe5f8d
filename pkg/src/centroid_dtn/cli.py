"""Command line entry point: ``simulate``, ``sweep`` and ``oracle``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, ConfigError, parse_config
from .events import format_log, parse_log
from .harness import SweepError, parse_sweep, report_row, run_cell, run_sweep, write_csv
from .oracle import oracle_from_log

log = logging.getLogger("centroid_dtn")


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_simulate(args):
    if args.config:
        cfg = parse_config(Path(args.config).read_text())
    else:
        cfg = PRESETS[args.preset]()
    overrides = {"router": args.router, "seed": args.seed}
    if args.noise is not None:
        overrides["noise_amplitude_m"] = args.noise
    cfg = replace(cfg, **overrides).validate()
    log.info("simulating %s seed=%d for %.0f s", cfg.router, cfg.seed, cfg.duration_s)
    cell = run_cell(cfg, keep_log=bool(args.events))
    _write(args.out, write_csv([report_row(cell.meta, cell.report)]))
    if args.events:
        _write(args.events, cell.log)


def cmd_sweep(args):
    spec = parse_sweep(Path(args.spec).read_text())
    n = len(spec.cells()) * len(spec.seeds)
    log.info("sweeping %s over %d runs", spec.axis, n)
    result = run_sweep(spec, workers=args.workers, keep_logs=bool(args.log_dir))
    _write(args.out, result.csv())
    if args.log_dir:
        d = Path(args.log_dir)
        d.mkdir(parents=True, exist_ok=True)
        for (router, value), cells in result.cells.items():
            for c in cells:
                (d / f"{router}_{spec.axis}-{value}_seed{c.config.seed}.log").write_text(c.log)


def cmd_oracle(args):
    events, meta = parse_log(Path(args.events).read_text())
    report = oracle_from_log(events, meta)
    row_meta = {
        "router": "oracle",
        "bandwidth_bps": meta.get("bandwidth_bps", ""),
        "buffer_bytes": meta.get("buffer_bytes", ""),
        "noise_m": meta.get("noise_m", ""),
        "seed": meta.get("seed", ""),
    }
    _write(args.out, write_csv([report_row(row_meta, report)]))


def build_parser():
    p = argparse.ArgumentParser(prog="centroid-dtn", description="Centroid DTN routing simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one simulation and write its metrics row")
    s.add_argument("--config", help="INI config file (default: the chosen preset)")
    s.add_argument("--preset", choices=sorted(PRESETS), default="city")
    s.add_argument("--router", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, help="GPS noise amplitude in metres")
    s.add_argument("--out", required=True, help="CSV path or - for stdout")
    s.add_argument("--events", help="also write the event log here")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="run a parameter sweep")
    w.add_argument("--spec", required=True)
    w.add_argument("--out", required=True)
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--log-dir", help="write one event log per run here")
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="best-case delivery from an event log")
    o.add_argument("--events", required=True)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except (ConfigError, SweepError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
