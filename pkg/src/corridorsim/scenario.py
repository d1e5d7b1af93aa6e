"""Scenario configuration for the corridor simulator.

A scenario is a flat ``key = value`` text document (``#`` starts a comment,
subsystem parameters use dotted keys such as ``vfr.d_S`` or ``dfr.t_buffer``).
Every tunable lives here; modules never hard-code operating values.

Unknown keys are a hard error, and validation reports every violated
constraint at once rather than the first one found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

VFR = "VFR"
DFR = "DFR"

# Sweep-level parameter presets: mode label -> config overrides.
MODE_PRESETS: dict[str, dict[str, float | str]] = {
    "VFR1": {"mode": VFR, "vfr.d_S": 20.0},
    "VFR2": {"mode": VFR, "vfr.d_S": 67.0},
    "DFR1": {"mode": DFR, "dfr.d_prop": 3.0},
    "DFR2": {"mode": DFR, "dfr.d_prop": 0.2},
}

# Disturbance presets studied in the experiments; "none" disables the process.
SCENARIO_PRESETS: dict[str, dict[str, float | bool | None]] = {
    "none": {"disturbance.enabled": False},
    "inv100_tau25": {
        "disturbance.enabled": True,
        "disturbance.t_inv": 100.0,
        "disturbance.tau": 25.0,
    },
    "inv40_tau25": {
        "disturbance.enabled": True,
        "disturbance.t_inv": 40.0,
        "disturbance.tau": 25.0,
    },
    "inv40_tau15": {
        "disturbance.enabled": True,
        "disturbance.t_inv": 40.0,
        "disturbance.tau": 15.0,
    },
}
SCENARIO_ALIASES = {"a": "none", "b": "inv100_tau25", "c": "inv40_tau25", "d": "inv40_tau15"}


class ScenarioError(ValueError):
    """Raised on parse or validation failure; ``issues`` lists every problem."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


@dataclass(frozen=True)
class VfrParams:
    d_S: float = 67.0          # desired standstill gap, m (20 close / 67 safe-stop)
    R_foresight: float = 800.0  # perception range for disturbances, m
    lambda1: float = 0.4       # spacing gain, 1/s^2
    lambda2: float = 0.6       # closing-speed gain, 1/s
    T_des: float = 1.9         # desired time headway, s


@dataclass(frozen=True)
class DfrParams:
    t_buffer: float = 3.0      # required ETA gap at each waypoint, s
    t_buffer_min: float = 1.5  # relaxation floor for the gap, s
    d_prop: float = 0.2        # update propagation delay between vehicles, s


@dataclass(frozen=True)
class DisturbanceParams:
    enabled: bool = False
    x_start: float = 2000.0    # upstream edge of the blocked region, m
    x_end: float = 2050.0      # downstream edge, m
    duration: float = 10.0     # active time per occurrence, s
    t_inv: float | None = None  # onset-to-onset interval, s; None = single occurrence
    tau: float = 15.0          # forecast horizon before onset, s
    first_onset: float = 120.0  # first activation time, s


@dataclass(frozen=True)
class ReportParams:
    ttc_cap: float = 100.0         # reported time-to-collision truncation, s
    separation_cap: float = 400.0  # reported separation truncation, m


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str = VFR
    arrival_rate: float = 0.1      # demanded vehicle arrivals, veh/s
    corridor_length: float = 3000.0  # m
    cwp_positions: tuple[float, ...] = tuple(300.0 * k for k in range(1, 11))
    v_avg: float = 20.0            # nominal cruise speed, m/s
    v_max: float = 30.0            # speed ceiling, m/s
    a_min: float = -3.0            # braking limit, m/s^2
    a_max: float = 3.0             # acceleration limit, m/s^2
    dt: float = 0.1                # tick length, s
    sim_end: float = 2000.0        # simulated horizon, s
    throughput_warmup: float = 300.0  # finishers before this time are not counted, s
    vfr: VfrParams = field(default_factory=VfrParams)
    dfr: DfrParams = field(default_factory=DfrParams)
    disturbance: DisturbanceParams = field(default_factory=DisturbanceParams)
    report: ReportParams = field(default_factory=ReportParams)


@dataclass(frozen=True)
class Disturbance:
    """One occurrence of the blocked region with its forecast instant."""

    index: int
    x_start: float
    x_end: float
    t_start: float
    t_end: float
    forecast_time: float


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_optional_float(raw: str) -> float | None:
    if raw.lower() in ("none", "off"):
        return None
    return float(raw)


def _parse_positions(raw: str) -> tuple[float, ...]:
    return tuple(float(part) for part in raw.split(",") if part.strip())


# key -> converter; values land in a flat override dict keyed by these names.
_KEY_PARSERS = {
    "mode": str.upper,
    "arrival_rate": float,
    "corridor_length": float,
    "cwp_spacing": float,
    "cwp_positions": _parse_positions,
    "v_avg": float,
    "v_max": float,
    "a_min": float,
    "a_max": float,
    "dt": float,
    "sim_end": float,
    "throughput_warmup": float,
    "vfr.d_S": float,
    "vfr.R_foresight": float,
    "vfr.lambda1": float,
    "vfr.lambda2": float,
    "vfr.T_des": float,
    "dfr.t_buffer": float,
    "dfr.t_buffer_min": float,
    "dfr.d_prop": float,
    "disturbance.enabled": _parse_bool,
    "disturbance.x_start": float,
    "disturbance.x_end": float,
    "disturbance.duration": float,
    "disturbance.t_inv": _parse_optional_float,
    "disturbance.tau": float,
    "disturbance.first_onset": float,
    "report.ttc_cap": float,
    "report.separation_cap": float,
}


def parse_overrides(text: str) -> dict:
    """Parse a scenario document into a flat ``{dotted_key: value}`` dict."""
    overrides: dict = {}
    issues: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            issues.append(f"line {lineno}: expected 'key = value', got {body!r}")
            continue
        key, raw = (part.strip() for part in body.split("=", 1))
        parser = _KEY_PARSERS.get(key)
        if parser is None:
            issues.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            overrides[key] = parser(raw)
        except ValueError as exc:
            issues.append(f"line {lineno}: bad value for {key!r}: {exc}")
    if issues:
        raise ScenarioError(issues)
    return overrides


def apply_overrides(config: ScenarioConfig, overrides: dict) -> ScenarioConfig:
    """Return a copy of ``config`` with the flat override dict applied."""
    top: dict = {}
    sub: dict[str, dict] = {"vfr": {}, "dfr": {}, "disturbance": {}, "report": {}}
    spacing = overrides.get("cwp_spacing")
    for key, value in overrides.items():
        if key == "cwp_spacing":
            continue
        if "." in key:
            group, name = key.split(".", 1)
            sub[group][name] = value
        else:
            top[key] = value
    if spacing is not None and "cwp_positions" not in overrides:
        length = top.get("corridor_length", config.corridor_length)
        if spacing <= 0:
            raise ScenarioError([f"cwp_spacing: must be positive, got {spacing}"])
        count = int(math.floor(length / spacing + 1e-9))
        top["cwp_positions"] = tuple(spacing * k for k in range(1, count + 1))
    if sub["vfr"]:
        top["vfr"] = replace(config.vfr, **sub["vfr"])
    if sub["dfr"]:
        top["dfr"] = replace(config.dfr, **sub["dfr"])
    if sub["disturbance"]:
        top["disturbance"] = replace(config.disturbance, **sub["disturbance"])
    if sub["report"]:
        top["report"] = replace(config.report, **sub["report"])
    return replace(config, **top)


def validate(config: ScenarioConfig) -> ScenarioConfig:
    """Check every invariant; raise ScenarioError listing all violations."""
    issues: list[str] = []

    def need(ok: bool, message: str) -> None:
        if not ok:
            issues.append(message)

    need(config.mode in (VFR, DFR), f"mode: must be VFR or DFR, got {config.mode!r}")
    need(config.arrival_rate > 0, f"arrival_rate: must be positive, got {config.arrival_rate}")
    need(config.corridor_length > 0,
         f"corridor_length: must be positive, got {config.corridor_length}")
    need(config.dt > 0, f"dt: must be positive, got {config.dt}")
    need(config.sim_end >= 0, f"sim_end: must be non-negative, got {config.sim_end}")
    need(config.a_min < 0 < config.a_max,
         f"a_min/a_max: need a_min < 0 < a_max, got {config.a_min}/{config.a_max}")
    need(0 < config.v_avg <= config.v_max,
         f"v_avg/v_max: need 0 < v_avg <= v_max, got {config.v_avg}/{config.v_max}")
    need(config.throughput_warmup >= 0,
         f"throughput_warmup: must be non-negative, got {config.throughput_warmup}")

    cwp = config.cwp_positions
    need(len(cwp) > 0, "cwp_positions: must not be empty")
    if any(b <= a for a, b in zip(cwp, cwp[1:])):
        issues.append(f"cwp_positions: must be strictly increasing, got {cwp}")
    if cwp and (cwp[0] <= 0 or cwp[-1] > config.corridor_length + 1e-9):
        issues.append(
            f"cwp_positions: must lie in (0, corridor_length], got {cwp[0]}..{cwp[-1]}")

    need(config.vfr.d_S > 0, f"vfr.d_S: must be positive, got {config.vfr.d_S}")
    need(config.vfr.R_foresight > 0,
         f"vfr.R_foresight: must be positive, got {config.vfr.R_foresight}")
    need(config.vfr.T_des >= 0, f"vfr.T_des: must be non-negative, got {config.vfr.T_des}")
    need(config.vfr.lambda1 >= 0, f"vfr.lambda1: must be non-negative, got {config.vfr.lambda1}")
    need(config.vfr.lambda2 >= 0, f"vfr.lambda2: must be non-negative, got {config.vfr.lambda2}")

    need(0 < config.dfr.t_buffer_min <= config.dfr.t_buffer,
         "dfr.t_buffer/t_buffer_min: need 0 < t_buffer_min <= t_buffer, got "
         f"{config.dfr.t_buffer_min}/{config.dfr.t_buffer}")
    need(config.dfr.d_prop >= 0, f"dfr.d_prop: must be non-negative, got {config.dfr.d_prop}")

    dist = config.disturbance
    if dist.enabled:
        need(0 <= dist.x_start < dist.x_end,
             f"disturbance.x_start/x_end: need 0 <= x_start < x_end, got "
             f"{dist.x_start}/{dist.x_end}")
        need(dist.x_end <= config.corridor_length,
             f"disturbance.x_end: must not exceed corridor_length, got {dist.x_end}")
        need(dist.duration > 0, f"disturbance.duration: must be positive, got {dist.duration}")
        need(dist.tau > 0, f"disturbance.tau: must be positive, got {dist.tau}")
        need(dist.first_onset - dist.tau >= 0,
             f"disturbance.first_onset: forecast time first_onset - tau must be >= 0, "
             f"got {dist.first_onset} - {dist.tau}")
        if dist.t_inv is not None:
            need(dist.t_inv > dist.duration,
                 f"disturbance.t_inv: must exceed duration, got {dist.t_inv}")

    need(config.report.ttc_cap > 0,
         f"report.ttc_cap: must be positive, got {config.report.ttc_cap}")
    need(config.report.separation_cap > 0,
         f"report.separation_cap: must be positive, got {config.report.separation_cap}")

    if issues:
        raise ScenarioError(issues)
    return config


def parse_scenario(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a validated config from a scenario document."""
    config = apply_overrides(base or ScenarioConfig(), parse_overrides(text))
    return validate(config)


def load_scenario(path: str | Path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text(encoding="utf-8"), base=base)


def with_mode_label(config: ScenarioConfig, label: str) -> ScenarioConfig:
    """Apply one of the sweep mode presets (VFR1, VFR2, DFR1, DFR2)."""
    preset = MODE_PRESETS.get(label.upper())
    if preset is None:
        raise ScenarioError([f"unknown mode label {label!r}; expected one of "
                             f"{sorted(MODE_PRESETS)}"])
    return validate(apply_overrides(config, dict(preset)))


def with_scenario_label(config: ScenarioConfig, label: str) -> ScenarioConfig:
    """Apply one of the disturbance presets (none, inv100_tau25, ...)."""
    canonical = SCENARIO_ALIASES.get(label.lower(), label.lower())
    preset = SCENARIO_PRESETS.get(canonical)
    if preset is None:
        raise ScenarioError([f"unknown scenario label {label!r}; expected one of "
                             f"{sorted(SCENARIO_PRESETS)} or aliases a-d"])
    return validate(apply_overrides(config, dict(preset)))


def disturbance_timeline(config: ScenarioConfig) -> list[Disturbance]:
    """Expand the disturbance process into concrete occurrences.

    Onsets run first_onset, first_onset + t_inv, ... while onset <= sim_end;
    a single occurrence when t_inv is unset; empty when disabled.
    """
    dist = config.disturbance
    if not dist.enabled:
        return []
    onsets: list[float] = []
    onset = dist.first_onset
    if dist.t_inv is None:
        if onset <= config.sim_end:
            onsets.append(onset)
    else:
        k = 0
        while True:
            onset = dist.first_onset + k * dist.t_inv
            if onset > config.sim_end + 1e-9:
                break
            onsets.append(onset)
            k += 1
    return [
        Disturbance(
            index=i,
            x_start=dist.x_start,
            x_end=dist.x_end,
            t_start=onset,
            t_end=onset + dist.duration,
            forecast_time=onset - dist.tau,
        )
        for i, onset in enumerate(onsets)
    ]
