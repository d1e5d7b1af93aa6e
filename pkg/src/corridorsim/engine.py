"""Discrete-time corridor run loop.

One tick advances the whole corridor by dt:

1. release due disturbance forecasts (coordinated mode) and apply due plan
   updates, cascades included;
2. process entry requests and admit vehicles whose entry is due;
3. freeze every vehicle's control command from tick-start state;
4. integrate all vehicles;
5. retire vehicles past the corridor end (crossing time interpolated inside
   the tick);
6. detect run-ending events on the post-step state: a separation that is no
   longer positive (collision) or a vehicle inside a blocked region during
   its closed active window;
7. advance the clock. Time is an integer tick count scaled by dt, so event
   times are exact grid points.

The loop is pure: same config, same result, across processes and runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import vfr
from .dfr import Scheduler
from .kinematics import step_linear
from .scenario import Disturbance, ScenarioConfig, disturbance_timeline

QUEUED = "QUEUED"
ACTIVE = "ACTIVE"
FINISHED = "FINISHED"

TIME_LIMIT = "TIME_LIMIT"
COLLISION = "COLLISION"
DISTURBANCE_ENTRY = "DISTURBANCE_ENTRY"

_EPS = 1e-9


@dataclass
class Event:
    kind: str
    t: float
    vehicle: int | None
    data: dict


@dataclass
class VehicleLog:
    vehicle: int
    requested: float
    entered: float | None = None
    finished: float | None = None


@dataclass
class SimulationResult:
    config: ScenarioConfig
    termination: str
    end_time: float
    events: list[Event]
    vehicles: list[VehicleLog]
    min_separation: float
    min_ttc: float
    finish_times: list[float]
    entered_count: int
    samples: list[tuple[float, str, int, int, float]] | None
    trace_rows: list[tuple[float, int, int, float]] | None


def _tick_time(k: int, dt: float) -> float:
    return round(k * dt, 9)


def ttc_value(gap: float, v_follower: float, v_leader: float,
              cap: float) -> float:
    """Time to collision, capped; cap also stands in for 'not closing'."""
    if gap <= 0.0:
        return 0.0
    if v_follower > v_leader:
        return min(gap / (v_follower - v_leader), cap)
    return cap


def run_simulation(config: ScenarioConfig,
                   record_samples: bool = False) -> SimulationResult:
    cfg = config
    dt = cfg.dt
    L = cfg.corridor_length
    rate = cfg.arrival_rate
    timeline = disturbance_timeline(cfg)
    coordinated = cfg.mode == "DFR"

    events: list[Event] = []
    logs: list[VehicleLog] = []
    xs: list[float] = []
    vs: list[float] = []
    status: list[str] = []
    active: list[int] = []
    entry_queue: list[int] = []
    finish_times: list[float] = []
    samples: list[tuple[float, str, int, int, float]] | None = (
        [] if record_samples else None)

    def emit(kind: str, t: float, vehicle: int | None, **data) -> None:
        events.append(Event(kind, t, vehicle, data))

    scheduler = Scheduler(cfg, timeline, emit) if coordinated else None
    released = [False] * len(timeline)

    min_sep = cfg.report.separation_cap
    min_ttc = cfg.report.ttc_cap
    sep_cap = cfg.report.separation_cap
    ttc_cap = cfg.report.ttc_cap

    tick = 0
    t = 0.0
    next_vid = 0
    termination = TIME_LIMIT

    while True:
        # 1. forecasts and plan updates -----------------------------------
        if scheduler is not None:
            for i, d in enumerate(timeline):
                if not released[i] and t >= d.forecast_time - _EPS:
                    released[i] = True
                    positions = {vid: xs[vid] for vid in active}
                    scheduler.on_forecast(i, t, positions, set(entry_queue))
            while (upd := scheduler.pop_due_update(t)) is not None:
                st = status[upd.vehicle]
                if st == ACTIVE:
                    scheduler.apply_update(upd, t, (xs[upd.vehicle],
                                                    vs[upd.vehicle]))
                elif st == QUEUED:
                    scheduler.apply_update(upd, t, None)
                # vehicles already out of the corridor are left alone

        # 2. entry requests and admissions --------------------------------
        while (req := next_vid / rate) <= t + _EPS and req <= cfg.sim_end + _EPS:
            vid = next_vid
            next_vid += 1
            xs.append(0.0)
            vs.append(0.0)
            status.append(QUEUED)
            logs.append(VehicleLog(vid, req))
            entry_queue.append(vid)
            if scheduler is not None:
                scheduler.request_entry(vid, req, t)

        if coordinated:
            while entry_queue:
                vid = entry_queue[0]
                sched = scheduler.schedules[vid]
                if sched.entry_time > t + _EPS:
                    break
                entry_queue.pop(0)
                plan = sched.plan
                xs[vid] = max(0.0, plan.position_at(t))
                vs[vid] = min(max(plan.speed_at(t), 0.0), cfg.v_max)
                status[vid] = ACTIVE
                active.append(vid)
                logs[vid].entered = t
                emit("VEHICLE_ENTERED", t, vid, admitted=sched.entry_time,
                     requested=logs[vid].requested)
        elif entry_queue:
            vid = entry_queue[0]
            if active:
                lead = active[-1]
                ok, v0 = vfr.vfr_entry_check(xs[lead], vs[lead], cfg)
            else:
                ok, v0 = vfr.vfr_entry_check(None, None, cfg)
            if ok:
                entry_queue.pop(0)
                xs[vid] = 0.0
                vs[vid] = v0
                status[vid] = ACTIVE
                active.append(vid)
                logs[vid].entered = t
                emit("VEHICLE_ENTERED", t, vid, requested=logs[vid].requested,
                     speed=v0)

        # 3 + 4. control from tick-start state, then integrate ------------
        prev_x = {vid: xs[vid] for vid in active}
        if coordinated:
            for vid in active:
                plan = scheduler.schedules[vid].plan
                # feedforward plus critically damped feedback (double pole at
                # -1 rad/s). On an exact cruise all three terms vanish, so a
                # conflict-free plan is followed without any error at all.
                a = (plan.accel_at(t)
                     + 2.0 * (plan.speed_at(t) - vs[vid])
                     + (plan.position_at(t) - xs[vid]))
                a = min(max(a, cfg.a_min), cfg.a_max)
                xs[vid], vs[vid] = step_linear(xs[vid], vs[vid], a, 0.0,
                                               math.inf, dt, cfg.a_min,
                                               cfg.a_max, cfg.v_max)
        else:
            here = [d for d in timeline
                    if d.forecast_time - _EPS <= t < d.t_end - _EPS]
            commands = []
            for i, vid in enumerate(active):
                lead = active[i - 1] if i > 0 else None
                leader = (xs[lead], vs[lead]) if lead is not None else None
                leader_v = vs[lead] if lead is not None else None
                flag, dist = vfr.update_mode(xs[vid], vs[vid], leader_v, here,
                                             t, cfg)
                commands.append(vfr.control_terms(xs[vid], vs[vid], leader,
                                                  flag, dist, t, cfg))
            for (C, k, cap), vid in zip(commands, active):
                xs[vid], vs[vid] = step_linear(xs[vid], vs[vid], C, k, cap,
                                               dt, cfg.a_min, cfg.a_max,
                                               cfg.v_max)

        tick += 1
        t_new = _tick_time(tick, dt)

        # 5. retire finishers ----------------------------------------------
        remaining = []
        for vid in active:
            if xs[vid] >= L:
                status[vid] = FINISHED
                x0 = prev_x[vid]
                frac = (L - x0) / (xs[vid] - x0) if xs[vid] > x0 else 1.0
                ft = t + frac * dt
                logs[vid].finished = ft
                finish_times.append(ft)
                emit("VEHICLE_FINISHED", t_new, vid, finish_time=ft)
            else:
                remaining.append(vid)
        active = remaining

        # 6. event detection and separation/ttc sampling -------------------
        terminal: str | None = None
        for i in range(1, len(active)):
            sep = xs[active[i - 1]] - xs[active[i]]
            if sep <= 0.0:
                terminal = COLLISION
                emit(COLLISION, t_new, active[i], leader=active[i - 1],
                     separation=sep)
                break
        if terminal is None:
            for d in timeline:
                if not (d.t_start - _EPS <= t_new <= d.t_end + _EPS):
                    continue
                for vid in active:
                    if d.x_start - _EPS <= xs[vid] <= d.x_end + _EPS:
                        terminal = DISTURBANCE_ENTRY
                        emit(DISTURBANCE_ENTRY, t_new, vid, x=xs[vid],
                             region=(d.x_start, d.x_end))
                        break
                if terminal is not None:
                    break

        open_edges = [d.x_start for d in timeline
                      if d.t_start - _EPS <= t_new <= d.t_end + _EPS]
        for i, vid in enumerate(active):
            lead = active[i - 1] if i > 0 else None
            sep = math.inf
            src = -1
            if lead is not None:
                sep = xs[lead] - xs[vid]
                src = lead
            for edge in open_edges:
                gap = edge - xs[vid]
                if 0.0 <= gap < sep:
                    sep = gap
                    src = -1
            if sep < math.inf:
                sep_rep = min(sep, sep_cap)
                if sep_rep < min_sep:
                    min_sep = sep_rep
                if samples is not None:
                    samples.append((t_new, "separation", vid, src, sep_rep))
            if lead is not None:
                ttc = ttc_value(xs[lead] - xs[vid], vs[vid], vs[lead],
                                ttc_cap)
                if ttc < min_ttc:
                    min_ttc = ttc
                if samples is not None:
                    samples.append((t_new, "ttc", vid, lead, ttc))

        # 7. advance or stop -----------------------------------------------
        t = t_new
        if terminal is not None:
            termination = terminal
            break
        if t >= cfg.sim_end - _EPS:
            break

    return SimulationResult(
        config=cfg,
        termination=termination,
        end_time=t,
        events=events,
        vehicles=logs,
        min_separation=min_sep,
        min_ttc=min_ttc,
        finish_times=finish_times,
        entered_count=sum(1 for lg in logs if lg.entered is not None),
        samples=samples,
        trace_rows=scheduler.trace_rows if scheduler is not None else None,
    )
