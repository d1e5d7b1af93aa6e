"""Single-corridor traffic simulator: reactive following vs. ETA schedules."""

from .engine import (COLLISION, DISTURBANCE_ENTRY, TIME_LIMIT,
                     SimulationResult, run_simulation)
from .metrics import (SweepRow, actual_arrival_rate, run_sweep, throughput,
                      write_samples_csv, write_sweep_csv, write_trace_csv)
from .scenario import (MODE_PRESETS, SCENARIO_PRESETS, ScenarioConfig,
                       ScenarioError, apply_overrides, load_scenario,
                       validate, with_mode_label, with_scenario_label)

__all__ = [
    "COLLISION", "DISTURBANCE_ENTRY", "TIME_LIMIT",
    "SimulationResult", "run_simulation",
    "SweepRow", "actual_arrival_rate", "run_sweep", "throughput",
    "write_samples_csv", "write_sweep_csv", "write_trace_csv",
    "MODE_PRESETS", "SCENARIO_PRESETS", "ScenarioConfig", "ScenarioError",
    "apply_overrides", "load_scenario", "validate",
    "with_mode_label", "with_scenario_label",
]
