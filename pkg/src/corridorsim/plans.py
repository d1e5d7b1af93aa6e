"""Piecewise constant-acceleration motion profiles.

A profile is the planned trajectory of one vehicle: an ordered list of
segments (start time, position, speed, acceleration), the last of which is a
cruise that extends indefinitely. Profiles are built leg by leg:

* a nominal leg runs to a position as early as the speed target allows
  (reach the target speed, then hold it);
* a gated leg must arrive at a position no earlier than a required time, and
  slows down, or stops and waits, just enough to arrive exactly on time.

All queries (position at time, first time at position) are closed form, so
plans are exact and deterministic. Speeds never leave [0, v_max].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

_EPS = 1e-9
_V_FLOOR = 1e-6  # below this a planned cruise speed degenerates to stop-and-wait


@dataclass
class Profile:
    """Planned trajectory as segments of constant acceleration."""

    ts: list[float] = field(default_factory=list)
    xs: list[float] = field(default_factory=list)
    vs: list[float] = field(default_factory=list)
    accs: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._hint = 0

    @property
    def start_time(self) -> float:
        return self.ts[0]

    @property
    def start_x(self) -> float:
        return self.xs[0]

    def _segment_index(self, t: float) -> int:
        i = self._hint
        n = len(self.ts)
        if i >= n or self.ts[i] > t:
            i = 0
        while i + 1 < n and self.ts[i + 1] <= t:
            i += 1
        self._hint = i
        return i

    def position_at(self, t: float) -> float:
        if t <= self.ts[0]:
            return self.xs[0]
        i = self._segment_index(t)
        dt = t - self.ts[i]
        return self.xs[i] + self.vs[i] * dt + 0.5 * self.accs[i] * dt * dt

    def speed_at(self, t: float) -> float:
        if t <= self.ts[0]:
            return self.vs[0]
        i = self._segment_index(t)
        return self.vs[i] + self.accs[i] * (t - self.ts[i])

    def accel_at(self, t: float) -> float:
        if t <= self.ts[0]:
            return 0.0
        return self.accs[self._segment_index(t)]

    def eta_at(self, p: float) -> float:
        """First time the plan reaches position p (start time if already past)."""
        if p <= self.xs[0]:
            return self.ts[0]
        n = len(self.ts)
        for i in range(n):
            t_next = self.ts[i + 1] if i + 1 < n else math.inf
            x0, v0, a = self.xs[i], self.vs[i], self.accs[i]
            dur = t_next - self.ts[i]
            if math.isfinite(dur):
                x_end = x0 + v0 * dur + 0.5 * a * dur * dur
            else:
                x_end = math.inf if v0 > 0.0 or a > 0.0 else x0
            if p > x_end + _EPS:
                continue
            d = p - x0
            if d <= 0.0:
                return self.ts[i]
            if abs(a) < _EPS:
                if v0 <= _V_FLOOR:
                    continue  # stationary hold, crossing happens later
                return self.ts[i] + d / v0
            disc = v0 * v0 + 2.0 * a * d
            if disc < 0.0:
                continue  # decelerates to rest short of p inside this segment
            # first root of (a/2) tau^2 + v0 tau - d = 0, valid for either sign of a
            tau = (math.sqrt(disc) - v0) / a
            if tau < 0.0:
                tau = 0.0
            return self.ts[i] + tau
        return math.inf

    def finish_speed(self) -> float:
        return self.vs[-1]


def _point_state(prof: Profile, t: float) -> tuple[float, float]:
    """(position, speed) with not-yet-started plans parked at their origin."""
    if t < prof.ts[0]:
        return prof.xs[0], 0.0
    return prof.position_at(t), prof.speed_at(t)


def min_gap(ahead: Profile, behind: Profile, t_from: float, t_to: float) -> float:
    """Smallest planned separation ahead(t) - behind(t) over [t_from, t_to]."""
    if t_to <= t_from:
        if t_to < t_from:
            return math.inf
        return _point_state(ahead, t_from)[0] - _point_state(behind, t_from)[0]
    cuts = {t_from, t_to}
    for prof in (ahead, behind):
        for ts in prof.ts:
            if t_from < ts < t_to:
                cuts.add(ts)
    times = sorted(cuts)

    def state(prof: Profile, t: float) -> tuple[float, float, float]:
        if t < prof.ts[0]:
            return prof.xs[0], 0.0, 0.0  # not yet underway: parked at start
        i = prof._segment_index(t)
        dt = t - prof.ts[i]
        return (prof.xs[i] + prof.vs[i] * dt + 0.5 * prof.accs[i] * dt * dt,
                prof.vs[i] + prof.accs[i] * dt, prof.accs[i])

    best = math.inf
    for t0, t1 in zip(times, times[1:]):
        xa, va, aa = state(ahead, t0)
        xb, vb, ab = state(behind, t0)
        # gap(tau) = c + b*tau + a*tau^2 on [0, t1 - t0]
        c = xa - xb
        b = va - vb
        a = 0.5 * (aa - ab)
        span = t1 - t0
        best = min(best, c, c + b * span + a * span * span)
        if abs(a) > _EPS:
            vertex = -b / (2.0 * a)
            if 0.0 < vertex < span:
                best = min(best, c + b * vertex + a * vertex * vertex)
    return best


def safe_gap(ahead: Profile, behind: Profile, t_from: float, t_to: float,
             brake: float) -> tuple[float, float]:
    """Worst-case margin between two plans if the rear one has to brake.

    min over t of  gap(t) - max(0, v_behind^2 - v_ahead^2) / (2*brake):
    the separation left over after the rear vehicle sheds its surplus speed
    at `brake`. Plain min_gap ignores closing speed, so a plan may stay clear
    of its leader while carrying far more speed than the remaining gap can
    absorb; this catches that. Returns (margin, time it is attained).
    """
    if t_to <= t_from:
        if t_to < t_from:
            return math.inf, t_from
        xa, va = _point_state(ahead, t_from)
        xb, vb = _point_state(behind, t_from)
        debt = max(0.0, vb * vb - va * va) / (2.0 * brake)
        return xa - xb - debt, t_from
    cuts = {t_from, t_to}
    for prof in (ahead, behind):
        for ts in prof.ts:
            if t_from < ts < t_to:
                cuts.add(ts)
    times = sorted(cuts)

    def state(prof: Profile, t: float) -> tuple[float, float, float]:
        if t < prof.ts[0]:
            return prof.xs[0], 0.0, 0.0
        i = prof._segment_index(t)
        dt = t - prof.ts[i]
        return (prof.xs[i] + prof.vs[i] * dt + 0.5 * prof.accs[i] * dt * dt,
                prof.vs[i] + prof.accs[i] * dt, prof.accs[i])

    inv2b = 1.0 / (2.0 * brake)
    best = math.inf
    best_t = t_from
    for t0, t1 in zip(times, times[1:]):
        xa, va, aa = state(ahead, t0)
        xb, vb, ab = state(behind, t0)
        span = t1 - t0
        # gap and speed-surplus are both quadratic in tau on the interval
        g2, g1, g0 = 0.5 * (aa - ab), va - vb, xa - xb
        s2 = (ab * ab - aa * aa) * inv2b
        s1 = 2.0 * (vb * ab - va * aa) * inv2b
        s0 = (vb * vb - va * va) * inv2b

        def margin(tau: float) -> float:
            gap = g0 + g1 * tau + g2 * tau * tau
            need = s0 + s1 * tau + s2 * tau * tau
            return gap - need if need > 0.0 else gap

        cand = [0.0, span]
        # speed-equality kink: v_behind - v_ahead is linear in tau
        dv1 = ab - aa
        if abs(dv1) > _EPS:
            root = (va - vb) / dv1
            if 0.0 < root < span:
                cand.append(root)
        # vertices of the two candidate quadratics
        for q2, q1 in ((g2, g1), (g2 - s2, g1 - s1)):
            if abs(q2) > _EPS:
                vtx = -q1 / (2.0 * q2)
                if 0.0 < vtx < span:
                    cand.append(vtx)
        for tau in cand:
            m = margin(tau)
            if m < best:
                best = m
                best_t = t0 + tau
    return best, best_t


class ProfileBuilder:
    """Accumulates segments; enforces non-negative durations and speeds."""

    def __init__(self, t0: float, x0: float, v0: float):
        self.t = t0
        self.x = x0
        self.v = max(0.0, v0)
        self.profile = Profile(ts=[t0], xs=[x0], vs=[self.v], accs=[0.0])

    def _push(self, a: float, duration: float) -> None:
        if duration <= _EPS:
            return
        prof = self.profile
        # overwrite the provisional trailing accel of the open segment
        prof.accs[-1] = a
        self.x += self.v * duration + 0.5 * a * duration * duration
        self.v = max(0.0, self.v + a * duration)
        self.t += duration
        prof.ts.append(self.t)
        prof.xs.append(self.x)
        prof.vs.append(self.v)
        prof.accs.append(0.0)

    def hold(self, duration: float) -> None:
        self._push(0.0, duration)

    def ramp_to(self, v_target: float, a_up: float, b_down: float) -> None:
        """Constant-rate speed change to v_target (no distance constraint)."""
        if v_target > self.v + _EPS:
            self._push(a_up, (v_target - self.v) / a_up)
        elif v_target < self.v - _EPS:
            self._push(-b_down, (self.v - v_target) / b_down)

    def nominal_to(self, p: float, v_target: float, a_up: float, b_down: float) -> None:
        """Reach position p as early as possible subject to the speed target."""
        d = p - self.x
        if d <= _EPS:
            return
        v = self.v
        if v < v_target - _EPS:
            d_ramp = (v_target * v_target - v * v) / (2.0 * a_up)
            if d_ramp <= d:
                self._push(a_up, (v_target - v) / a_up)
            else:
                disc = max(0.0, v * v + 2.0 * a_up * d)
                self._push(a_up, (math.sqrt(disc) - v) / a_up)
        elif v > v_target + _EPS:
            d_ramp = (v * v - v_target * v_target) / (2.0 * b_down)
            if d_ramp <= d:
                self._push(-b_down, (v - v_target) / b_down)
            else:
                disc = max(0.0, v * v - 2.0 * b_down * d)
                self._push(-b_down, (v - math.sqrt(disc)) / b_down)
        remaining = p - self.x
        if remaining > _EPS:
            if self.v <= _V_FLOOR:
                # ran out of speed short of p; creep forward at the ramp rate
                disc = max(0.0, self.v * self.v + 2.0 * a_up * remaining)
                self._push(a_up, (math.sqrt(disc) - self.v) / a_up)
            else:
                self._push(0.0, remaining / self.v)

    def nominal_arrival(self, p: float, v_target: float, a_up: float,
                        b_down: float) -> float:
        """Arrival time of nominal_to without committing any segments."""
        d = p - self.x
        if d <= _EPS:
            return self.t
        v = self.v
        t = self.t
        if v < v_target - _EPS:
            d_ramp = (v_target * v_target - v * v) / (2.0 * a_up)
            if d_ramp <= d:
                return t + (v_target - v) / a_up + (d - d_ramp) / v_target
            disc = max(0.0, v * v + 2.0 * a_up * d)
            return t + (math.sqrt(disc) - v) / a_up
        if v > v_target + _EPS:
            d_ramp = (v * v - v_target * v_target) / (2.0 * b_down)
            if d_ramp <= d:
                return t + (v - v_target) / b_down + (d - d_ramp) / v_target
            disc = max(0.0, v * v - 2.0 * b_down * d)
            return t + (v - math.sqrt(disc)) / b_down
        if v <= _V_FLOOR:
            disc = max(0.0, 2.0 * a_up * d)
            return t + math.sqrt(disc) / a_up
        return t + d / v

    def gated_to(self, p: float, not_before: float, v_target: float,
                 a_up: float, b_down: float) -> bool:
        """Arrive at p no earlier than not_before; True when achievable.

        Arrives exactly at not_before when a slowdown is needed, picking the
        fastest shape that works: a milder speed-up, a reduced cruise speed,
        or a full stop with a timed restart. When even full braking reaches
        p too early (too close, too fast) the leg brakes flat out, crosses p
        early, and reports False.
        """
        d = p - self.x
        if d <= _EPS:
            return self.t >= not_before - _EPS
        t_nom = self.nominal_arrival(p, v_target, a_up, b_down)
        if t_nom >= not_before - _EPS:
            self.nominal_to(p, v_target, a_up, b_down)
            return True

        v = self.v
        tau = not_before - self.t
        if v > _V_FLOOR:
            t_hold = self.t + d / v
            if not_before <= t_hold + _EPS:
                # needs average speed >= current: milder acceleration
                s = v + a_up * tau
                disc = max(0.0, s * s - v * v - 2.0 * a_up * d)
                v_m = s - math.sqrt(disc)
                v_m = min(max(v_m, v), v_target)
                self.ramp_to(v_m, a_up, b_down)
                rem = p - self.x
                if rem > _EPS:
                    self._push(0.0, rem / max(v_m, _V_FLOOR))
                return True
            d_brake = v * v / (2.0 * b_down)
            if d <= d_brake - _EPS:
                # cannot rest before p: latest possible crossing is a full brake
                t_lat = self.t + (v - math.sqrt(max(0.0, v * v - 2.0 * b_down * d))) / b_down
                if not_before <= t_lat + _EPS:
                    a_star = 2.0 * (d - v * tau) / (tau * tau)
                    a_star = max(a_star, -b_down)
                    self._push(a_star, tau)
                    return True
                self._push(-b_down,
                           (v - math.sqrt(max(0.0, v * v - 2.0 * b_down * d))) / b_down)
                return False
            s = v - b_down * tau
            disc = max(0.0, s * s + 2.0 * b_down * d - v * v)
            v_s = s + math.sqrt(disc)
            if v_s > _V_FLOOR:
                v_s = min(v_s, v)
                self.ramp_to(v_s, a_up, b_down)
                rem = p - self.x
                if rem > _EPS:
                    self._push(0.0, rem / v_s)
                return True
            self.ramp_to(0.0, a_up, b_down)
        # at rest (or braking to rest): hold, then restart timed to arrive on time
        d2 = p - self.x
        if d2 <= _EPS:
            return self.t >= not_before - _EPS
        ramp = (v_target * v_target) / (2.0 * a_up)
        if d2 >= ramp:
            travel = v_target / a_up + (d2 - ramp) / v_target
        else:
            travel = math.sqrt(2.0 * d2 / a_up)
        wait = not_before - travel - self.t
        if wait > _EPS:
            self.hold(wait)
        self.nominal_to(p, v_target, a_up, b_down)
        return True

    def finish(self, corridor_end: float, v_target: float, a_up: float,
               b_down: float) -> Profile:
        """Run out to the corridor end and seal the profile with a cruise."""
        self.nominal_to(corridor_end, v_target, a_up, b_down)
        prof = self.profile
        if prof.vs[-1] <= _V_FLOOR:
            prof.accs[-1] = a_up  # never strand a sealed plan at rest
        return prof


def cruise_profile(t0: float, speed: float) -> Profile:
    """Constant-speed plan from the corridor entrance."""
    return Profile(ts=[t0], xs=[0.0], vs=[speed], accs=[0.0])
