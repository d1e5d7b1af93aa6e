"""Reactive (visual-flight-rules style) longitudinal controller.

Vehicles follow the vehicle ahead with the Helly linear law and react to a
blocked region only once it is inside their foresight range and either
forecast or active. The response is re-decided every tick: pass before the
region activates if the projected crossing finishes strictly before onset at
the conservative speed min(own, leader), otherwise brake to rest short of the
region with the gentlest constant deceleration that still makes it.
"""

from __future__ import annotations

import math

from .kinematics import AccelFn, can_stop_before
from .scenario import Disturbance, ScenarioConfig

FOLLOW = "FOLLOW"
PASS = "PASS"
STOP = "STOP"

# Rest target sits just short of the region edge so a completed stop is never
# counted as having reached x_start itself.
STOP_STANDOFF_M = 0.01


def vfr_entry_check(gap_ahead: float | None, leader_speed: float | None,
                    config: ScenarioConfig) -> tuple[bool, float]:
    """Admission rule at the corridor entrance.

    With an empty corridor the vehicle enters at cruise speed. Otherwise it
    enters at the leader's current speed, but only once the gap to the
    leader is at least the standstill distance d_S.
    """
    if gap_ahead is None or leader_speed is None:
        return True, config.v_avg
    if gap_ahead >= config.vfr.d_S:
        return True, leader_speed
    return False, 0.0


def perceive_disturbance(x: float, timeline: list[Disturbance], t: float,
                         R_foresight: float) -> Disturbance | None:
    """Nearest not-yet-cleared disturbance the vehicle is allowed to know about.

    A disturbance is visible once its region start lies within R_foresight
    ahead and its forecast has been released (t >= forecast_time); it stays
    relevant until it ends or the vehicle clears x_end.
    """
    best: Disturbance | None = None
    for dist in timeline:
        if t < dist.forecast_time or t >= dist.t_end or x >= dist.x_end:
            continue
        if dist.x_start - x > R_foresight:
            continue
        if best is None or dist.x_start < best.x_start or (
                dist.x_start == best.x_start and dist.t_start < best.t_start):
            best = dist
    return best


def decide_disturbance_response(x: float, v_self: float, v_front: float | None,
                                dist: Disturbance, t: float) -> str:
    """PASS or STOP for a perceived disturbance; FOLLOW once past it.

    The projected crossing speed is the conservative min(own, leader). The
    vehicle passes only if it would clear the far edge strictly before the
    region activates at that speed.
    """
    if x >= dist.x_end:
        return FOLLOW
    v_c = v_self if v_front is None else min(v_self, v_front)
    if v_c <= 0.0:
        return STOP
    if (dist.x_end - x) / v_c + t < dist.t_start:
        return PASS
    return STOP


def update_mode(x: float, v: float, leader_v: float | None,
                timeline: list[Disturbance], t: float,
                config: ScenarioConfig) -> tuple[str, Disturbance | None]:
    """Per-tick mode refresh: perceive, then re-decide pass vs stop."""
    dist = perceive_disturbance(x, timeline, t, config.vfr.R_foresight)
    if dist is None:
        return FOLLOW, None
    flag = decide_disturbance_response(x, v, leader_v, dist, t)
    return flag, dist if flag != FOLLOW else None


def control_terms(x: float, v: float, leader: tuple[float, float] | None,
                  flag: str, dist: Disturbance | None, t: float,
                  config: ScenarioConfig) -> tuple[float, float, float]:
    """Per-tick command as a linear law min(C - k*v_stage, cap).

    Gap and closing speed toward the leader are frozen at the tick start;
    only the vehicle's own stage speed varies inside the integrator, which
    keeps an equilibrium platoon exactly stationary in gap coordinates. The
    cap carries the stop command (gentlest deceleration that still rests
    short of the region before it activates, the hard limit if none does).
    """
    p = config.vfr
    if leader is not None:
        dx0 = leader[0] - x
        dv0 = leader[1] - v
        C = p.lambda1 * (dx0 - p.d_S) + p.lambda2 * dv0
        k = p.lambda1 * p.T_des
    else:
        C = p.lambda1 * config.v_avg
        k = p.lambda1

    cap = math.inf
    if flag == STOP and dist is not None:
        deadline = dist.t_start if t < dist.t_start else math.inf
        plan = can_stop_before(x, v, dist.x_start - STOP_STANDOFF_M, deadline,
                               t, config.a_min)
        cap = plan.decel if plan.feasible else config.a_min
    return C, k, cap


def accel_closure(x: float, v: float, leader: tuple[float, float] | None,
                  flag: str, dist: Disturbance | None, t: float,
                  config: ScenarioConfig) -> AccelFn:
    """control_terms wrapped as a stage-state callback for the integrator."""
    C, k, cap = control_terms(x, v, leader, flag, dist, t, config)

    def law(_t: float, _x: float, v_stage: float) -> float:
        return min(C - k * v_stage, cap)

    return law


def vfr_acceleration(x: float, v: float, leader: tuple[float, float] | None,
                     flag: str, dist: Disturbance | None, t: float,
                     config: ScenarioConfig) -> float:
    """Tick-start value of the commanded acceleration (unclamped)."""
    C, k, cap = control_terms(x, v, leader, flag, dist, t, config)
    return min(C - k * v, cap)
