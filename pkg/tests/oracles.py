"""Independent fine-step references for the closed-form kinematics.

Everything here integrates at a small fixed step with trapezoidal position
updates (exact for piecewise-linear speed), so any disagreement with the
closed forms indicts the closed forms, not the oracle. Vectorised over
cases with numpy to keep the randomized grids fast.
"""

from __future__ import annotations

import numpy as np

DT = 1e-3


def crossing_times_full_throttle(x0, v0, x_target, a_max, v_max, dt=DT):
    """First times x >= x_target when accelerating flat out (then cruising).

    All arguments are equal-length 1-D arrays; one simulated clock advances
    every case in lockstep. The crossing instant is refined by bisection
    inside the crossing step, so resolution is far below dt.
    """
    x = np.asarray(x0, float).copy()
    v = np.asarray(v0, float).copy()
    x_target = np.asarray(x_target, float)
    a_max = np.asarray(a_max, float)
    v_max = np.asarray(v_max, float)
    out = np.zeros_like(x)
    active = x < x_target
    t = 0.0
    while active.any():
        v1 = np.minimum(v + a_max * dt, v_max)
        x1 = x + 0.5 * (v + v1) * dt
        hit = active & (x1 >= x_target)
        if hit.any():
            lo = np.zeros(int(hit.sum()))
            hi = np.full_like(lo, dt)
            xv, vv = x[hit], v[hit]
            am, vm, tg = a_max[hit], v_max[hit], x_target[hit]
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                v_mid = np.minimum(vv + am * mid, vm)
                x_mid = xv + 0.5 * (vv + v_mid) * mid
                crossed = x_mid >= tg
                hi = np.where(crossed, mid, hi)
                lo = np.where(crossed, lo, mid)
            out[hit] = t + hi
            active &= ~hit
        x, v = x1, v1
        t += dt
        if t > 1e4:  # pragma: no cover - grid ranges keep runs far shorter
            raise RuntimeError("oracle integration did not terminate")
    return out


def stop_profiles(v0, decel, dt=DT):
    """(distance, time) to come to rest braking at constant decel > 0.

    Vectorised; the partial step in which v crosses zero contributes its
    exact trapezoidal remainder. decel == 0 with v0 == 0 yields (0, 0).
    """
    v = np.asarray(v0, float).copy()
    b = np.asarray(decel, float)
    if np.any((b <= 0) & (v > 0)):
        raise ValueError("moving case with non-positive decel never stops")
    dist = np.zeros_like(v)
    time = np.zeros_like(v)
    active = v > 0
    while active.any():
        t_rest = np.divide(v, b, out=np.zeros_like(v), where=b > 0)
        rests = active & (t_rest <= dt)  # comes to rest inside this step
        step = np.where(active, np.where(rests, t_rest, dt), 0.0)
        # v is zeroed exactly on the resting step; subtracting b*(v/b) can
        # leave a one-ulp residue that would keep the lane live forever.
        v1 = np.where(rests, 0.0, np.maximum(v - b * step, 0.0))
        dist += 0.5 * (v + v1) * step
        time += step
        v = v1
        active = v > 0
    return dist, time
