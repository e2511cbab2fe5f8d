import csv
import io

import pytest

from centroid_dtn.cli import main
from centroid_dtn.config import ConfigError
from centroid_dtn.events import parse_log
from centroid_dtn.harness import COLUMNS, SweepError, parse_sweep, report_row, run_cell, run_sweep

TINY = """\
preset = desk
duration_s = 120
warmup_s = 20
world_width_m = 300
world_height_m = 300
message_interval_min_s = 2
message_interval_max_s = 4
message_ttl_s = 100

[group:walkers]
count = 5
speed_min = 1
speed_max = 3
pause_min = 0
pause_max = 5

[group:cars]
count = 3
speed_min = 5
speed_max = 12
pause_min = 0
pause_max = 2
"""


def sweep_text(axis, values, routers, seeds):
    return f"{TINY}\n[sweep]\naxis = {axis}\nvalues = {values}\nrouters = {routers}\nseeds = {seeds}\n"


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def bw_sweep():
    spec = parse_sweep(sweep_text("bandwidth_bps", "125000, 250000, 1000000, 2000000, 10000000",
                                  "centroid, centermass, vector, epidemic", "0-3"))
    return spec, run_sweep(spec)


def test_sweep_row_count(bw_sweep):
    spec, result = bw_sweep
    out = rows(result.csv())
    assert len(out) == 4 * 5 * 4 + 4 * 5
    assert list(out[0]) == list(COLUMNS)
    assert sum(r["seed"] == "agg4" for r in out) == 20


def test_sweep_rerun_identical(bw_sweep):
    spec, result = bw_sweep
    assert run_sweep(spec).csv() == result.csv()


def test_cell_isolated_from_sweep(bw_sweep):
    spec, result = bw_sweep
    cfg = spec.config_for("vector", 250000, 2)
    alone = report_row(*(lambda c: (c.meta, c.report))(run_cell(cfg)))
    in_sweep = [r for r in rows(result.csv())
                if r["router"] == "vector" and r["bandwidth_bps"] == "250000" and r["seed"] == "2"]
    assert in_sweep == [{k: str(v) for k, v in alone.items()}]


def test_single_cell_sweep():
    spec = parse_sweep(sweep_text("buffer_bytes", "1000000", "epidemic", "7"))
    out = rows(run_sweep(spec).csv())
    assert len(out) == 2
    assert out[1]["seed"] == "agg1"
    assert out[0]["delivery_prob"] == out[1]["delivery_prob"]


def test_workers_do_not_change_output():
    spec = parse_sweep(sweep_text("noise_amplitude_m", "0, 20", "centroid, vector", "0, 1"))
    assert run_sweep(spec, workers=2).csv() == run_sweep(spec).csv()


def test_sweep_spec_errors():
    with pytest.raises(ConfigError):
        parse_sweep(sweep_text("range_m", "1", "centroid", "0"))
    with pytest.raises(ConfigError):
        parse_sweep(TINY)
    with pytest.raises(ConfigError):
        parse_sweep(sweep_text("buffer_bytes", "1000", "maxprop", "0"))


def test_failing_cell_is_named():
    spec = parse_sweep(sweep_text("buffer_bytes", "1000000, -5", "centroid", "0"))
    with pytest.raises(SweepError, match="buffer_bytes=-5"):
        run_sweep(spec)


def test_cli_simulate_and_oracle(tmp_path):
    cfg = tmp_path / "tiny.ini"
    cfg.write_text(TINY)
    out, log, orc = tmp_path / "run.csv", tmp_path / "run.log", tmp_path / "oracle.csv"
    assert main(["simulate", "--config", str(cfg), "--router", "centermass-noisy", "--seed", "4",
                 "--out", str(out), "--events", str(log)]) == 0
    (row,) = rows(out.read_text())
    assert row["router"] == "centermass-noisy" and float(row["noise_m"]) == 20 and row["seed"] == "4"
    events, meta = parse_log(log.read_text())
    assert events and meta["router"] == "centermass-noisy"

    assert main(["oracle", "--events", str(log), "--out", str(orc)]) == 0
    (o,) = rows(orc.read_text())
    assert o["router"] == "oracle" and o["forwarded"] == "0"
    assert float(o["delivery_prob"]) >= float(row["delivery_prob"])


def test_cli_noise_flag(tmp_path):
    cfg = tmp_path / "tiny.ini"
    cfg.write_text(TINY)
    out = tmp_path / "run.csv"
    assert main(["simulate", "--config", str(cfg), "--router", "vector", "--noise", "7.5", "--out", str(out)]) == 0
    assert float(rows(out.read_text())[0]["noise_m"]) == 7.5


def test_cli_sweep_with_logs(tmp_path):
    spec = tmp_path / "s.ini"
    spec.write_text(sweep_text("noise_amplitude_m", "0", "epidemic", "0, 1"))
    out, logs = tmp_path / "s.csv", tmp_path / "logs"
    assert main(["sweep", "--spec", str(spec), "--out", str(out), "--log-dir", str(logs)]) == 0
    assert len(rows(out.read_text())) == 3
    assert len(list(logs.glob("*.log"))) == 2


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("timestep_s = -1\n")
    assert main(["simulate", "--config", str(bad), "--router", "centroid", "--out", "-"]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["oracle", "--events", str(tmp_path / "missing.log"), "--out", "-"]) == 1
    assert main(["simulate", "--config", str(bad).replace("bad", "tiny"), "--router", "x", "--out", "-"]) == 1
