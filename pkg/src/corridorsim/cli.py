"""Command-line front end.

Subcommands: ``run`` (one scenario file -> samples CSV + one-row summary),
``sweep`` (label grid -> sweep CSV), ``trace`` (schedule reservations over a
run -> trace CSV), ``validate`` (config check only).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import metrics
from .engine import run_simulation
from .scenario import (MODE_PRESETS, SCENARIO_ALIASES, SCENARIO_PRESETS,
                       ScenarioConfig, load_scenario)

SCENARIO_ORDER = ["none", "inv100_tau25", "inv40_tau25", "inv40_tau15"]
MODE_ORDER = ["VFR1", "VFR2", "DFR1", "DFR2"]


def _parse_rates(spec: str) -> list[float]:
    try:
        start_s, stop_s, step_s = spec.split(":")
        start, stop, step = float(start_s), float(stop_s), float(step_s)
    except ValueError:
        raise ValueError(f"--rates: expected start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise ValueError(f"--rates: empty or descending grid {spec!r}")
    rates = []
    k = 0
    while (r := round(start + k * step, 9)) <= stop + 1e-9:
        rates.append(r)
        k += 1
    return rates


def _parse_modes(spec: str) -> list[str]:
    modes = [m.strip() for m in spec.split(",") if m.strip()]
    for m in modes:
        if m.upper() not in MODE_PRESETS:
            raise ValueError(f"--modes: unknown mode {m!r}, expected one of "
                             f"{sorted(MODE_PRESETS)}")
    return [m.upper() for m in modes]


def _parse_scenarios(spec: str) -> list[str]:
    labels = []
    for s in (part.strip().lower() for part in spec.split(",") if part.strip()):
        s = SCENARIO_ALIASES.get(s, s)
        if s not in SCENARIO_PRESETS:
            raise ValueError(f"--scenarios: unknown label {s!r}, expected "
                             f"one of {sorted(SCENARIO_PRESETS)}")
        labels.append(s)
    return labels


def _load(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    return load_scenario(path)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.scenario)
    res = run_simulation(cfg, record_samples=True)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_samples_csv(res.samples, out / "samples.csv")
    label = Path(args.scenario).stem if args.scenario else "default"
    row = metrics.SweepRow(label, cfg.mode, cfg.arrival_rate,
                           metrics.actual_arrival_rate(res),
                           metrics.throughput(res, cfg), res.min_ttc,
                           res.min_separation, res.termination)
    metrics.write_sweep_csv([row], out / "summary.csv")
    print(f"{res.termination} t={res.end_time:g} "
          f"entered={res.entered_count} finished={len(res.finish_times)} "
          f"min_sep={res.min_separation:.3f} min_ttc={res.min_ttc:.3f}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    base = _load(args.scenario) if args.scenario else None
    rows = metrics.run_sweep(_parse_scenarios(args.scenarios),
                             _parse_modes(args.modes),
                             _parse_rates(args.rates),
                             jobs=args.jobs, base=base)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_sweep_csv(rows, out / "sweep.csv")
    print(f"wrote {len(rows)} rows to {out / 'sweep.csv'}")
    return 0


def _cmd_trace(args: argparse.Namespace) -> int:
    cfg = _load(args.scenario)
    if cfg.mode != "DFR":
        print("trace: scenario must use a DFR mode (reservations only exist "
              "under temporal coordination)", file=sys.stderr)
        return 2
    res = run_simulation(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_trace_csv(res.trace_rows, out / "trace.csv")
    print(f"wrote {len(res.trace_rows)} reservations to {out / 'trace.csv'}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    cfg = _load(args.scenario)
    print(f"OK: mode={cfg.mode} arrival_rate={cfg.arrival_rate:g} "
          f"disturbance={'on' if cfg.disturbance.enabled else 'off'}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="corridorsim")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario, write samples CSV")
    p_run.add_argument("--scenario", help="scenario file (omit for defaults)")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a rate/mode/scenario grid")
    p_sweep.add_argument("--scenario", help="base config template file")
    p_sweep.add_argument("--scenarios", default=",".join(SCENARIO_ORDER),
                         help="comma-separated scenario labels")
    p_sweep.add_argument("--modes", default=",".join(MODE_ORDER),
                         help="comma-separated mode labels")
    p_sweep.add_argument("--rates", default="0.01:0.25:0.01",
                         help="rate grid start:stop:step, veh/s")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel worker processes")
    p_sweep.add_argument("--out", default=".", help="output directory")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_trace = sub.add_parser("trace", help="run one scenario, write the "
                                           "reservation trace CSV")
    p_trace.add_argument("--scenario", help="scenario file (omit for defaults)")
    p_trace.add_argument("--out", default=".", help="output directory")
    p_trace.set_defaults(func=_cmd_trace)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("--scenario", help="scenario file (omit for defaults)")
    p_val.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, metrics.SweepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
