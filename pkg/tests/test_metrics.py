"""Metrics, CSV formatting, and the sweep harness."""

import dataclasses

import pytest

from corridorsim.engine import (COLLISION, DISTURBANCE_ENTRY, TIME_LIMIT,
                                SimulationResult)
from corridorsim.metrics import (SWEEP_HEADER, SweepError, SweepRow,
                                 actual_arrival_rate, cell_config,
                                 format_sweep_csv, run_cell, run_sweep,
                                 throughput, write_samples_csv,
                                 write_sweep_csv, write_trace_csv)
from corridorsim.scenario import ScenarioConfig, apply_overrides


def fake_result(termination=TIME_LIMIT, end_time=2000.0, finish_times=(),
                entered=0, config=None):
    cfg = config if config is not None else ScenarioConfig()
    return SimulationResult(config=cfg, termination=termination,
                            end_time=end_time, events=[], vehicles=[],
                            min_separation=50.0, min_ttc=100.0,
                            finish_times=list(finish_times),
                            entered_count=entered, samples=None,
                            trace_rows=None)


# ---------------------------------------------------------------- throughput

def test_throughput_counts_post_warmup_finishers():
    cfg = ScenarioConfig()
    assert cfg.throughput_warmup == 300.0 and cfg.sim_end == 2000.0
    # 323 finishers spread inside (300, 2000] -> 323 / 1700 = 0.19 exactly
    times = [300.0 + (1700.0 * (i + 1)) / 323.0 for i in range(323)]
    res = fake_result(finish_times=times, config=cfg)
    assert throughput(res, cfg) == pytest.approx(0.19, abs=1e-12)


def test_throughput_window_boundaries():
    cfg = ScenarioConfig()
    # warm-up boundary excluded, horizon boundary included
    res = fake_result(finish_times=[300.0, 2000.0], config=cfg)
    assert throughput(res, cfg) == pytest.approx(1.0 / 1700.0)
    res = fake_result(finish_times=[299.9, 100.0], config=cfg)
    assert throughput(res, cfg) == 0.0


@pytest.mark.parametrize("term", [COLLISION, DISTURBANCE_ENTRY])
def test_throughput_zero_for_terminated_runs(term):
    cfg = ScenarioConfig()
    # finishers before the crash don't count for anything
    res = fake_result(termination=term, end_time=812.3,
                      finish_times=[400.0, 500.0, 600.0], config=cfg)
    assert throughput(res, cfg) == 0.0


def test_actual_arrival_rate():
    assert actual_arrival_rate(fake_result(end_time=500.0, entered=60)) == \
        pytest.approx(0.12)
    assert actual_arrival_rate(fake_result(end_time=0.0, entered=0)) == 0.0


# -------------------------------------------------------------- config wiring

def test_cell_config_applies_labels_and_rate():
    cfg = cell_config("inv40_tau25", "DFR2", 0.17)
    assert cfg.mode == "DFR" and cfg.dfr.d_prop == 0.2
    assert cfg.arrival_rate == 0.17
    assert cfg.disturbance.t_inv == 40.0 and cfg.disturbance.tau == 25.0


def test_cell_config_respects_base():
    base = apply_overrides(ScenarioConfig(), {"sim_end": 250.0})
    cfg = cell_config("none", "VFR1", 0.05, base)
    assert cfg.sim_end == 250.0 and cfg.vfr.d_S == 20.0
    assert not cfg.disturbance.enabled


def test_run_cell_names_bad_cell():
    with pytest.raises(SweepError, match=r"glitch.*VFR1.*0\.1"):
        run_cell(("glitch", "VFR1", 0.1, None))


# ------------------------------------------------------------- CSV formatting

def test_sweep_csv_format_is_stable():
    rows = [SweepRow("none", "VFR1", 0.1, 0.0987654321, 0.19,
                     100.0, 33.3333333, TIME_LIMIT)]
    text = format_sweep_csv(rows)
    lines = text.split("\n")
    assert lines[0] == SWEEP_HEADER
    assert lines[1] == ("none,VFR1,0.1,0.098765,0.190000,"
                        "100.000000,33.333333,TIME_LIMIT")
    assert text.endswith("\n") and lines[-1] == ""


def test_sweep_csv_rate_uses_shortest_form():
    # %g keeps the grid labels readable: 0.1 not 0.100000
    rows = [SweepRow("none", "VFR1", r, 0.0, 0.0, 100.0, 1.0, TIME_LIMIT)
            for r in (0.01, 0.1, 0.25)]
    body = format_sweep_csv(rows).splitlines()[1:]
    assert [ln.split(",")[2] for ln in body] == ["0.01", "0.1", "0.25"]


def test_write_csvs_use_unix_newlines(tmp_path):
    rows = [SweepRow("none", "VFR1", 0.1, 0.1, 0.1, 100.0, 1.0, TIME_LIMIT)]
    p = tmp_path / "sweep.csv"
    write_sweep_csv(rows, p)
    raw = p.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")

    p2 = tmp_path / "samples.csv"
    write_samples_csv([(1.5, "separation", 2, 1, 33.25)], p2)
    assert p2.read_text() == ("t,kind,follower,leader,value\n"
                              "1.500000,separation,2,1,33.250000\n")

    p3 = tmp_path / "trace.csv"
    write_trace_csv([(105.0, 0, 7, 131.25)], p3)
    assert p3.read_text() == ("t,vehicle,cwp,eta\n"
                              "105.000000,0,7,131.250000\n")


# ------------------------------------------------------------------ the sweep

def fast_base():
    # transit takes ~150 s, so leave room for a few finishers past warm-up
    return apply_overrides(ScenarioConfig(), {"sim_end": 300.0,
                                              "throughput_warmup": 160.0})


def test_run_sweep_canonical_order():
    rows = run_sweep(["none"], ["VFR2", "VFR1"], [0.1, 0.02],
                     base=fast_base())
    key = [(r.scenario, r.mode, r.arrival_rate) for r in rows]
    assert key == [("none", "VFR1", 0.02), ("none", "VFR1", 0.1),
                   ("none", "VFR2", 0.02), ("none", "VFR2", 0.1)]


def test_run_sweep_parallel_matches_serial():
    args = (["none"], ["VFR1", "DFR2"], [0.05, 0.15])
    serial = run_sweep(*args, jobs=1, base=fast_base())
    parallel = run_sweep(*args, jobs=2, base=fast_base())
    assert serial == parallel
    assert format_sweep_csv(serial) == format_sweep_csv(parallel)


def test_sweep_rows_reflect_runs():
    rows = run_sweep(["none"], ["DFR2"], [0.1], base=fast_base())
    (row,) = rows
    assert row.termination == TIME_LIMIT
    assert row.min_ttc == 100.0
    assert row.throughput > 0.0
    assert 0.0 < row.actual_rate <= 0.12
