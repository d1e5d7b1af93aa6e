"""Run-level metrics and the sweep harness.

A sweep cell is one (scenario label, mode label, arrival rate) triple; cells
share nothing and may run in any order or in parallel, so the CSV is sorted
into canonical (scenario, mode, rate) order after the fact and floats are
written with a fixed format — the bytes depend only on the configs.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass
from pathlib import Path

from .engine import SimulationResult, TIME_LIMIT, run_simulation
from .scenario import (ScenarioConfig, apply_overrides, with_mode_label,
                       with_scenario_label)

SWEEP_HEADER = ("scenario,mode,arrival_rate,actual_rate,throughput,"
                "min_ttc,min_separation,termination")
SAMPLES_HEADER = "t,kind,follower,leader,value"
TRACE_HEADER = "t,vehicle,cwp,eta"


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    mode: str
    arrival_rate: float
    actual_rate: float
    throughput: float
    min_ttc: float
    min_separation: float
    termination: str


class SweepError(RuntimeError):
    pass


def throughput(result: SimulationResult, config: ScenarioConfig) -> float:
    """Finishers per second after warm-up; zero for terminated runs."""
    if result.termination != TIME_LIMIT:
        return 0.0
    w = config.throughput_warmup
    n = sum(1 for ft in result.finish_times if w < ft <= config.sim_end)
    return n / (config.sim_end - w)


def actual_arrival_rate(result: SimulationResult) -> float:
    if result.end_time <= 0.0:
        return 0.0
    return result.entered_count / result.end_time


def cell_config(scenario: str, mode: str, rate: float,
                base: ScenarioConfig | None = None) -> ScenarioConfig:
    cfg = base if base is not None else ScenarioConfig()
    cfg = with_scenario_label(cfg, scenario)
    cfg = with_mode_label(cfg, mode)
    return apply_overrides(cfg, {"arrival_rate": rate})


def run_cell(cell: tuple[str, str, float, ScenarioConfig | None]) -> SweepRow:
    scenario, mode, rate, base = cell
    try:
        cfg = cell_config(scenario, mode, rate, base)
    except ValueError as exc:
        raise SweepError(f"cell ({scenario}, {mode}, {rate}): {exc}") from exc
    res = run_simulation(cfg)
    return SweepRow(scenario, mode, rate, actual_arrival_rate(res),
                    throughput(res, cfg), res.min_ttc, res.min_separation,
                    res.termination)


def run_sweep(scenarios: list[str], modes: list[str], rates: list[float],
              jobs: int = 1,
              base: ScenarioConfig | None = None) -> list[SweepRow]:
    cells = [(s, m, r, base) for s in scenarios for m in modes for r in rates]
    if jobs > 1 and len(cells) > 1:
        with multiprocessing.Pool(jobs) as pool:
            rows = pool.map(run_cell, cells)
    else:
        rows = [run_cell(c) for c in cells]
    rows.sort(key=lambda r: (r.scenario, r.mode, r.arrival_rate))
    return rows


def _f(x: float) -> str:
    return f"{x:.6f}"


def format_sweep_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(",".join([r.scenario, r.mode, f"{r.arrival_rate:g}",
                               _f(r.actual_rate), _f(r.throughput),
                               _f(r.min_ttc), _f(r.min_separation),
                               r.termination]))
    return "\n".join(lines) + "\n"


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    Path(path).write_text(format_sweep_csv(rows), newline="")


def write_samples_csv(samples: list[tuple[float, str, int, int, float]],
                      path: str | Path) -> None:
    lines = [SAMPLES_HEADER]
    for t, kind, follower, leader, value in samples:
        lines.append(f"{_f(t)},{kind},{follower},{leader},{_f(value)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="")


def write_trace_csv(trace_rows: list[tuple[float, int, int, float]],
                    path: str | Path) -> None:
    lines = [TRACE_HEADER]
    for t, vehicle, cwp, eta in trace_rows:
        lines.append(f"{_f(t)},{vehicle},{cwp},{_f(eta)}")
    Path(path).write_text("\n".join(lines) + "\n", newline="")
