"""Temporally coordinated corridor scheduling.

Instead of reacting to what is physically ahead, each vehicle holds a motion
plan whose arrival times at fixed constraint points along the corridor are
reserved centrally. Admission, disturbance response, and follower protection
all operate on those reservations:

* entry is granted at the earliest time that keeps at least ``t_buffer``
  seconds to the previous vehicle's reservation at every constraint point;
* when a disturbance forecast is released, every vehicle whose plan crosses
  the closed window gets a scheduled plan update, nearest vehicle first, the
  k-th update applying ``k * d_prop`` seconds after the forecast;
* a rebuilt plan either clears the disturbed region before the window opens
  (pass) or arrives at its upstream edge after the window closes (delay);
* each applied update is checked against the follower's reservations, and a
  violated follower is queued for its own update in the same cadence, so a
  single forecast fans out into a chain of per-vehicle fixes.

When a required arrival gap cannot be met the buffer is relaxed once, down
to ``t_buffer_min``; beyond that the plan is rebuilt best-effort and flagged
as an emergency, and the resulting window entry (if any) is left for the
run-level event detector to judge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .kinematics import min_time_to_reach
from .plans import Profile, ProfileBuilder, cruise_profile, min_gap, safe_gap
from .scenario import Disturbance, ScenarioConfig

_EPS = 1e-9
_TOL = 1e-6
# Clearance every plan must keep over its leader's plan. Arrival-time buffers
# hold only at the constraint points, so this is what keeps two plans from
# crossing in between. Followers are held to the plain positional gap (their
# plans are rebuilt in the same cascade as the leader's, so a transient speed
# surplus resolves in-plan); an elected pass is additionally charged its
# braking distance (plans.safe_gap) because a pass is approved against the
# leader's current plan and must stay survivable if that plan changes.
PLAN_CLEARANCE_M = 2.0
DELAY_STANDOFF_M = 0.5  # wait this far upstream of a window so tracking error
#                         cannot push the physical vehicle over the boundary
# Plans use this fraction of the vehicle's accel envelope. A plan that rides
# the physical limit leaves the tracking feedback no authority during its
# hardest segments, so execution error grows unchecked exactly when the plan
# is tightest; the reserve keeps the real limit available for corrections.
PLAN_ACCEL_MARGIN = 0.9


@dataclass
class EtaSchedule:
    vehicle: int
    entry_time: float
    plan: Profile
    etas: dict[int, float]  # constraint point index (1-based) -> arrival time


@dataclass(frozen=True)
class PendingUpdate:
    vehicle: int
    disturbance: int
    slot: int
    apply_time: float
    cause: str  # "conflict" | "buffer"


@dataclass
class _UpdateQueue:
    forecast_time: float
    slots_used: int = 0
    pending: list[PendingUpdate] = field(default_factory=list)


def tracking_acceleration(x: float, v: float, plan: Profile, t: float,
                          config: ScenarioConfig) -> float:
    """Constant accel for one tick that steers onto the planned trajectory.

    Feedforward plus critically damped feedback (double pole at -1 rad/s).
    A one-tick deadbeat law is tempting but its 1/dt^2 position gain
    saturates the actuator and limit-cycles around any plan with
    acceleration transients; this one degrades gracefully. On an exact
    cruise every term vanishes, so an undisturbed plan is followed with
    zero error.
    """
    a = (plan.accel_at(t)
         + 2.0 * (plan.speed_at(t) - v)
         + (plan.position_at(t) - x))
    return min(max(a, config.a_min), config.a_max)


def plan_conflicts(plan: Profile, dist: Disturbance) -> bool:
    """True when the plan occupies [x_start, x_end] during the closed window."""
    if plan.start_x >= dist.x_end - _EPS:
        return False
    enter = plan.eta_at(dist.x_start)
    leave = plan.eta_at(dist.x_end)
    return enter <= dist.t_end + _TOL and leave >= dist.t_start - _TOL


@dataclass
class _Point:
    pos: float
    hard: float = -math.inf     # non-negotiable earliest arrival
    pred_gap: bool = False      # stack behind predecessor's reservation here
    cwp: int = 0                # 1-based index when the point is a real CWP


class Scheduler:
    """Reservation ledger plus the plan construction and update machinery."""

    def __init__(self, config: ScenarioConfig, timeline: list[Disturbance], emit):
        self.config = config
        self.timeline = timeline
        self.emit = emit
        self.cwps = list(config.cwp_positions)
        self.schedules: dict[int, EtaSchedule] = {}
        self.queues: dict[int, _UpdateQueue] = {}
        self.trace_rows: list[tuple[float, int, int, float]] = []

    # -- entry admission ---------------------------------------------------

    def _pushed_entry(self, vid: int, candidate: float) -> float:
        """Earliest entry >= candidate keeping t_buffer to the predecessor."""
        cfg = self.config
        pred = self.schedules.get(vid - 1)
        if pred is None:
            return candidate
        cand = candidate
        for _ in range(1000):
            shift = 0.0
            for k, pos in enumerate(self.cwps, start=1):
                mine = cand + pos / cfg.v_avg
                need = pred.etas.get(k, -math.inf) + cfg.dfr.t_buffer - mine
                shift = max(shift, need)
            if pred.plan.start_x <= _EPS:
                need = pred.plan.start_time + cfg.dfr.t_buffer - cand
                shift = max(shift, need)
            if shift <= _TOL:
                return cand
            cand += shift
        raise RuntimeError(  # pragma: no cover - admission push always converges
            f"entry admission did not converge for vehicle {vid}")

    def request_entry(self, vid: int, requested: float, t_now: float) -> float:
        cfg = self.config
        cand = self._pushed_entry(vid, requested)
        sched = EtaSchedule(vid, cand, cruise_profile(cand, cfg.v_avg),
                            {k: cand + pos / cfg.v_avg
                             for k, pos in enumerate(self.cwps, start=1)})
        self.schedules[vid] = sched
        pred = self.schedules.get(vid - 1)
        clearance_ok = pred is None or self._clears(pred, sched.plan, cand)
        if not clearance_ok or any(
                self._visible(d, t_now) and plan_conflicts(sched.plan, d)
                for d in self.timeline):
            self._install_plan(vid, cand, 0.0, cfg.v_avg, t_now, cause="entry")
        else:
            self._record_trace(t_now, sched)
        return cand

    # -- forecast handling ---------------------------------------------------

    def _visible(self, dist: Disturbance, t: float) -> bool:
        return dist.forecast_time - _EPS <= t <= dist.t_end + _EPS

    def on_forecast(self, d_index: int, t: float, positions: dict[int, float],
                    queued: set[int]) -> None:
        """Schedule plan updates for every vehicle conflicting with a window.

        ``positions`` holds in-corridor vehicles; ``queued`` the admitted but
        not yet entered ones (treated as at the entrance). Vehicles in
        neither set are done with the corridor and are left alone.
        """
        dist = self.timeline[d_index]
        queue = _UpdateQueue(forecast_time=dist.forecast_time)
        self.queues[d_index] = queue
        affected = []
        for vid in sorted(self.schedules):
            sched = self.schedules[vid]
            if vid in positions:
                x = positions[vid]
            elif vid in queued:
                x = 0.0
            else:
                continue
            if x >= dist.x_end - _EPS:
                continue
            if plan_conflicts(sched.plan, dist):
                affected.append((dist.x_start - x, vid))
        affected.sort()
        for _, vid in affected:
            self._push_update(d_index, vid, "conflict")
        self.emit("FORECAST_RELEASED", t, None,
                  disturbance=d_index, updates=len(affected))

    def _push_update(self, d_index: int, vid: int, cause: str) -> PendingUpdate | None:
        queue = self.queues[d_index]
        if any(u.vehicle == vid for u in queue.pending):
            return None
        upd = PendingUpdate(vid, d_index, queue.slots_used,
                            queue.forecast_time
                            + queue.slots_used * self.config.dfr.d_prop,
                            cause)
        queue.slots_used += 1
        queue.pending.append(upd)
        return upd

    def pop_due_update(self, t: float) -> PendingUpdate | None:
        best: PendingUpdate | None = None
        for d_index in sorted(self.queues):
            for u in self.queues[d_index].pending:
                if u.apply_time <= t + _TOL:
                    key = (u.apply_time, u.disturbance, u.slot)
                    if best is None or key < (best.apply_time, best.disturbance,
                                              best.slot):
                        best = u
        if best is not None:
            self.queues[best.disturbance].pending.remove(best)
        return best

    # -- plan updates ---------------------------------------------------------

    def apply_update(self, upd: PendingUpdate, t: float,
                     state: tuple[float, float] | None) -> None:
        """Rebuild one vehicle's plan; queue the follower if it gets violated.

        ``state`` is the vehicle's (position, speed) when it is in the
        corridor, or None for an admitted-but-not-entered vehicle (whose
        admission may be pushed later). The caller must not route updates to
        vehicles already out of the corridor.
        """
        vid = upd.vehicle
        if state is None:
            sched = self.schedules[vid]
            self._install_plan(vid, sched.entry_time, 0.0, self.config.v_avg,
                               t, cause=upd.cause)
        else:
            x, v = state
            self._install_plan(vid, t, x, v, t, cause=upd.cause)
        self.emit("ETA_UPDATE_APPLIED", t, vid,
                  disturbance=upd.disturbance, slot=upd.slot, cause=upd.cause)
        fol = vid + 1
        if fol in self.schedules and self._buffer_violated(vid, fol):
            cascade = self._push_update(upd.disturbance, fol, "buffer")
            if cascade is not None:
                self.emit("UPDATE_SCHEDULED", t, fol,
                          disturbance=upd.disturbance, slot=cascade.slot,
                          apply_time=cascade.apply_time)

    def _buffer_violated(self, lead_vid: int, fol_vid: int) -> bool:
        lead = self.schedules[lead_vid]
        fol = self.schedules[fol_vid]
        lead_x = lead.plan.start_x
        for k, pos in enumerate(self.cwps, start=1):
            if pos <= lead_x + _EPS:
                continue  # already behind the leader's replanned horizon
            if k not in fol.etas or k not in lead.etas:
                continue
            if fol.etas[k] < lead.etas[k] + self.config.dfr.t_buffer - _TOL:
                return True
        return False

    # -- plan construction ------------------------------------------------

    def _install_plan(self, vid: int, t0: float, x0: float, v0: float,
                      t_now: float, cause: str) -> None:
        cfg = self.config
        sched = self.schedules[vid]
        pred = self.schedules.get(vid - 1)
        if x0 <= _EPS:
            # not yet underway: soak any predecessor slip into the entry time
            t0 = self._pushed_entry(vid, t0)
            v0 = cfg.v_avg
        visible = [d for d in self.timeline
                   if self._visible(d, t_now) and x0 < d.x_end - _EPS]

        delay: set[int] = set()     # indices into visible, forced to wait out
        passing: set[int] = set()   # indices cleared ahead of the window
        for _ in range(len(visible) + 2):
            for i, d in enumerate(visible):
                if i in delay or i in passing:
                    continue
                if not plan_conflicts(sched.plan, d):
                    continue
                if self._try_pass(i, visible, delay, passing, t0, x0, v0, pred):
                    passing.add(i)
                else:
                    delay.add(i)
            prof, etas, emerg = self._build(visible, delay, passing,
                                            t0, x0, v0, pred, t_now, vid)
            new_conflict = False
            for i, d in enumerate(visible):
                if i in delay or i in passing or emerg:
                    continue
                if plan_conflicts(prof, d):
                    # the rebuild pushed this vehicle into a later window
                    if self._try_pass(i, visible, delay, passing, t0, x0, v0,
                                      pred):
                        passing.add(i)
                    else:
                        delay.add(i)
                    new_conflict = True
            if not new_conflict:
                break
            sched = EtaSchedule(vid, sched.entry_time, prof, etas)  # re-test base

        sched = self.schedules[vid]
        sched.plan = prof
        sched.etas.update(etas)
        if x0 <= _EPS:
            sched.entry_time = t0
        self._record_trace(t_now, sched, only_after=x0)

    def _region_end(self, visible: list[Disturbance], passing: set[int]) -> float:
        return max((visible[i].x_end for i in passing), default=-math.inf)

    def _points(self, visible: list[Disturbance], delay: set[int],
                x0: float) -> list[_Point]:
        cfg = self.config
        by_pos: dict[float, _Point] = {}
        for k, pos in enumerate(self.cwps, start=1):
            if pos > x0 + _EPS:
                by_pos[pos] = _Point(pos, pred_gap=True, cwp=k)
        for i, d in enumerate(visible):
            gate = d.x_start - DELAY_STANDOFF_M
            if gate <= x0 + _EPS:
                continue
            pt = by_pos.setdefault(gate, _Point(gate))
            pt.pred_gap = True
            if i in delay:
                pt.hard = max(pt.hard, d.t_end + 2.0 * cfg.dt)
        return sorted(by_pos.values(), key=lambda p: p.pos)

    def _try_pass(self, i: int, visible: list[Disturbance], delay: set[int],
                  passing: set[int], t0: float, x0: float, v0: float,
                  pred: EtaSchedule | None) -> bool:
        cfg = self.config
        d = visible[i]
        margin = 2.0 * cfg.dt
        reach = min_time_to_reach(x0, v0, d.x_end, cfg.a_max, cfg.v_max)
        if t0 + reach >= d.t_start - margin:
            return False
        cand_pass = passing | {i}
        prof, fails = self._attempt(self._points(visible, delay, x0),
                                    self._region_end(visible, cand_pass),
                                    set(), t0, x0, v0, pred, False)
        if fails:
            return False
        if prof.eta_at(d.x_end) >= d.t_start - margin:
            return False
        if pred is not None:
            horizon = min(prof.eta_at(cfg.corridor_length),
                          pred.plan.eta_at(cfg.corridor_length))
            g, _ = safe_gap(pred.plan, prof, t0, horizon,
                            -PLAN_ACCEL_MARGIN * cfg.a_min)
            if g < PLAN_CLEARANCE_M:
                return False
        return True

    def _reqs(self, points: list[_Point], relaxed: set[float],
              pred: EtaSchedule | None) -> list[float]:
        cfg = self.config
        out: list[float] = []
        for pt in points:
            req = pt.hard
            if pt.pred_gap and pred is not None:
                buf = (cfg.dfr.t_buffer_min if pt.pos in relaxed
                       else cfg.dfr.t_buffer)
                req = max(req, pred.plan.eta_at(pt.pos) + buf)
            out.append(req)
        return out

    def _attempt(self, points: list[_Point], region_end: float,
                 relaxed: set[float], t0: float, x0: float, v0: float,
                 pred: EtaSchedule | None,
                 spread: bool) -> tuple[Profile, list[_Point]]:
        """One profile over the constraint points; returns unmet points.

        The lazy walk gates each point off the previous one, so a slowdown
        lands as late as the timetable allows: followers that hear about the
        plan change late find it still approximately valid. ``spread`` walks
        the same points but takes each binding requirement as one long leg
        from the current state, putting the whole slowdown up front; that is
        the lowest curve any on-time plan can ride, used when the lazy shape
        would cross the predecessor between gates. Points inside a spread leg
        are checked against the built profile afterwards.
        """
        cfg = self.config
        a_up = PLAN_ACCEL_MARGIN * cfg.a_max
        b_down = -PLAN_ACCEL_MARGIN * cfg.a_min
        reqs = self._reqs(points, relaxed, pred)
        bld = ProfileBuilder(t0, x0, v0)
        failures: list[_Point] = []
        pending = list(range(len(points)))
        deferred: list[int] = []
        while pending:
            nxt = pending[0]
            if spread:
                best_v = math.inf
                for j in pending:
                    if reqs[j] == -math.inf or reqs[j] <= bld.t + _EPS:
                        continue
                    need = (points[j].pos - bld.x) / (reqs[j] - bld.t)
                    if need < best_v - _EPS:
                        best_v, nxt = need, j
            pt = points[nxt]
            v_t = cfg.v_max if pt.pos <= region_end + _EPS else cfg.v_avg
            if reqs[nxt] == -math.inf:
                bld.nominal_to(pt.pos, v_t, a_up, b_down)
            elif not bld.gated_to(pt.pos, reqs[nxt], v_t, a_up, b_down):
                failures.append(pt)
            k = pending.index(nxt)
            deferred.extend(pending[:k])
            del pending[:k + 1]
        prof = bld.finish(cfg.corridor_length, cfg.v_avg, a_up, b_down)
        for j in deferred:
            if reqs[j] > -math.inf and prof.eta_at(points[j].pos) < reqs[j] - _TOL:
                failures.append(points[j])
        failures.sort(key=lambda p: p.pos)
        return prof, failures

    def _solve(self, points: list[_Point], region_end: float, t0: float,
               x0: float, v0: float, pred: EtaSchedule | None,
               spread: bool) -> tuple[Profile, bool, list[tuple]]:
        cfg = self.config
        relaxed: set[float] = set()
        events: list[tuple] = []
        emergency = False
        prof = None
        for _ in range(len(points) + 2):
            prof, fails = self._attempt(points, region_end, relaxed,
                                        t0, x0, v0, pred, spread)
            if not fails:
                break
            pt = fails[0]
            can_relax = (pt.pred_gap and pred is not None
                         and pt.pos not in relaxed)
            if can_relax:
                soft = pred.plan.eta_at(pt.pos) + cfg.dfr.t_buffer_min
                if soft < pt.hard - _EPS:
                    can_relax = False  # binding constraint is the window itself
            if can_relax:
                relaxed.add(pt.pos)
                events.append(("BUFFER_RELAXED", pt.pos,
                               cfg.dfr.t_buffer_min))
                continue
            emergency = True
            events.append(("EMERGENCY", pt.pos, None))
            break
        return prof, emergency, events

    def _clears(self, pred: EtaSchedule, prof: Profile, t0: float) -> bool:
        L = self.config.corridor_length
        horizon = min(prof.eta_at(L), pred.plan.eta_at(L))
        if horizon <= t0 + _EPS:
            return True
        return min_gap(pred.plan, prof, t0, horizon) >= PLAN_CLEARANCE_M - _TOL

    def _build(self, visible: list[Disturbance], delay: set[int],
               passing: set[int], t0: float, x0: float, v0: float,
               pred: EtaSchedule | None, t_now: float,
               vid: int) -> tuple[Profile, dict[int, float], bool]:
        cfg = self.config
        points = self._points(visible, delay, x0)
        region_end = self._region_end(visible, passing)
        prof, emergency, events = self._solve(points, region_end,
                                              t0, x0, v0, pred, False)
        # Arrival gates constrain only the constraint points; the lazy shape
        # can cross the predecessor between them (a loosely gated follower
        # keeps cruising into a leader already braking for its own gate).
        # When it does, rebuild with the slowdown spread to the front; if
        # even that crosses, the conflict is not resolvable by timing alone.
        if pred is not None and not emergency and not self._clears(pred, prof, t0):
            prof, emergency, events = self._solve(points, region_end,
                                                  t0, x0, v0, pred, True)
            if not emergency and not self._clears(pred, prof, t0):
                emergency = True
                events.append(("EMERGENCY", x0, None))
        for kind, point, buf in events:
            if kind == "BUFFER_RELAXED":
                self.emit(kind, t_now, vid, point=point, buffer=buf)
            else:
                self.emit(kind, t_now, vid, point=point)
        etas = {pt.cwp: prof.eta_at(pt.pos) for pt in points if pt.cwp}
        return prof, etas, emergency

    # -- trace ------------------------------------------------------------

    def _record_trace(self, t: float, sched: EtaSchedule,
                      only_after: float = -1.0) -> None:
        for k, pos in enumerate(self.cwps, start=1):
            if pos > only_after and k in sched.etas:
                self.trace_rows.append((t, sched.vehicle, k, sched.etas[k]))
