"""Point-mass longitudinal kinematics.

The integrator advances (position, velocity) with a fourth-order Runge-Kutta
scheme whose stage accelerations are clamped to [a_min, a_max] and whose
post-step velocity is clipped to [0, v_max]. When the clip activates, the
position increment is recomputed from the clipped speed profile (run at the
step's mean acceleration until the bound is hit, then hold the bound), so
position never reflects speeds outside the legal range.

Controllers supply ``accel_fn(t, x, v)``; the follower's stage speed varies
across stages while everything the controller captured (leader state, gap)
stays frozen at the step's start.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple


class KinematicState(NamedTuple):
    x: float  # position along the corridor, m
    v: float  # speed, m/s


class Limits(NamedTuple):
    a_min: float  # braking bound, m/s^2 (negative)
    a_max: float  # acceleration bound, m/s^2 (positive)
    v_max: float  # speed ceiling, m/s


class StopPlan(NamedTuple):
    feasible: bool
    decel: float  # gentlest constant deceleration that works, else a_min


AccelFn = Callable[[float, float, float], float]


def helly_acceleration(dx: float, dv: float, v: float,
                       d_S: float, T_des: float,
                       lambda1: float, lambda2: float) -> float:
    """Linear car-following response, unclamped.

    dx is the gap to the leader, dv the leader's speed minus own speed, and
    the desired gap grows linearly with own speed: D(v) = d_S + T_des * v.
    Saturation to the vehicle's acceleration limits is the integrator's job.
    """
    return lambda1 * (dx - (d_S + T_des * v)) + lambda2 * dv


def step(state: KinematicState, accel_fn: AccelFn, t: float, dt: float,
         limits: Limits) -> KinematicState:
    """One clipped RK4 step of (x' = v, v' = accel_fn)."""
    x, v = step_fast(state.x, state.v, accel_fn, t, dt, limits.a_min,
                     limits.a_max, limits.v_max)
    return KinematicState(x, v)


def step_fast(x: float, v: float, accel_fn: AccelFn, t: float, dt: float,
              a_min: float, a_max: float, v_max: float) -> tuple[float, float]:
    """Allocation-free core of :func:`step`; returns (x, v)."""
    half = 0.5 * dt

    a1 = accel_fn(t, x, v)
    if a1 > a_max:
        a1 = a_max
    elif a1 < a_min:
        a1 = a_min
    v1 = v + a1 * half

    a2 = accel_fn(t + half, x + v * half, v1)
    if a2 > a_max:
        a2 = a_max
    elif a2 < a_min:
        a2 = a_min
    v2 = v + a2 * half

    a3 = accel_fn(t + half, x + v1 * half, v2)
    if a3 > a_max:
        a3 = a_max
    elif a3 < a_min:
        a3 = a_min
    v3 = v + a3 * dt

    a4 = accel_fn(t + dt, x + v2 * dt, v3)
    if a4 > a_max:
        a4 = a_max
    elif a4 < a_min:
        a4 = a_min

    v_raw = v + dt * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0

    if 0.0 <= v_raw <= v_max:
        dx = v * dt + dt * dt * (a1 + a2 + a3) / 6.0
        if dx < 0.0:
            dx = 0.0
        return x + dx, v_raw

    bound = 0.0 if v_raw < 0.0 else v_max
    a_eff = (v_raw - v) / dt
    if a_eff == 0.0:
        return x + v * dt, bound
    t_hit = (bound - v) / a_eff
    if t_hit < 0.0:
        t_hit = 0.0
    elif t_hit > dt:
        t_hit = dt
    dx = v * t_hit + 0.5 * a_eff * t_hit * t_hit + bound * (dt - t_hit)
    if dx < 0.0:
        dx = 0.0
    return x + dx, bound


def step_linear(x: float, v: float, C: float, k: float, cap: float,
                dt: float, a_min: float, a_max: float,
                v_max: float) -> tuple[float, float]:
    """step_fast specialized to the law a(v_stage) = min(C - k*v_stage, cap).

    Every controller command in use is linear in the stage speed with an
    optional constant ceiling (a tick-constant command is C with k = 0), so
    the hot integration loop can skip the per-stage Python callback.
    Mirrors step_fast operation for operation.
    """
    half = 0.5 * dt

    a1 = C - k * v
    if a1 > cap:
        a1 = cap
    if a1 > a_max:
        a1 = a_max
    elif a1 < a_min:
        a1 = a_min
    v1 = v + a1 * half

    a2 = C - k * v1
    if a2 > cap:
        a2 = cap
    if a2 > a_max:
        a2 = a_max
    elif a2 < a_min:
        a2 = a_min
    v2 = v + a2 * half

    a3 = C - k * v2
    if a3 > cap:
        a3 = cap
    if a3 > a_max:
        a3 = a_max
    elif a3 < a_min:
        a3 = a_min
    v3 = v + a3 * dt

    a4 = C - k * v3
    if a4 > cap:
        a4 = cap
    if a4 > a_max:
        a4 = a_max
    elif a4 < a_min:
        a4 = a_min

    v_raw = v + dt * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0

    if 0.0 <= v_raw <= v_max:
        dx = v * dt + dt * dt * (a1 + a2 + a3) / 6.0
        if dx < 0.0:
            dx = 0.0
        return x + dx, v_raw

    bound = 0.0 if v_raw < 0.0 else v_max
    a_eff = (v_raw - v) / dt
    if a_eff == 0.0:
        return x + v * dt, bound
    t_hit = (bound - v) / a_eff
    if t_hit < 0.0:
        t_hit = 0.0
    elif t_hit > dt:
        t_hit = dt
    dx = v * t_hit + 0.5 * a_eff * t_hit * t_hit + bound * (dt - t_hit)
    if dx < 0.0:
        dx = 0.0
    return x + dx, bound


def min_time_to_reach(x0: float, v0: float, x_target: float,
                      a_max: float, v_max: float) -> float:
    """Shortest time to reach x_target: full acceleration, then cruise at v_max."""
    d = x_target - x0
    if d <= 0.0:
        return 0.0
    if v0 >= v_max:
        return d / v_max
    d_accel = (v_max * v_max - v0 * v0) / (2.0 * a_max)
    if d >= d_accel:
        return (v_max - v0) / a_max + (d - d_accel) / v_max
    return (math.sqrt(v0 * v0 + 2.0 * a_max * d) - v0) / a_max


def can_stop_before(x0: float, v0: float, x_stop: float, t_deadline: float,
                    t_now: float, a_min: float) -> StopPlan:
    """Gentlest constant deceleration reaching rest at or before x_stop by t_deadline.

    The deadline may be +inf (stop anywhere before x_stop, whenever). When no
    deceleration in [a_min, 0] works, reports infeasible with a_min as the
    best available command.
    """
    if v0 <= 0.0:
        return StopPlan(True, 0.0)
    d = x_stop - x0
    horizon = t_deadline - t_now
    if d <= 0.0 or horizon <= 0.0:
        return StopPlan(False, a_min)
    need = v0 * v0 / (2.0 * d)
    if math.isfinite(horizon):
        need = max(need, v0 / horizon)
    if need <= -a_min:
        return StopPlan(True, -need)
    return StopPlan(False, a_min)
