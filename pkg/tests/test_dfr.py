"""Coordinated mode: admissions, conflict replans, update propagation."""

import dataclasses
import math
from collections import defaultdict

import pytest

from corridorsim.dfr import (
    DELAY_STANDOFF_M,
    Scheduler,
    plan_conflicts,
    tracking_acceleration,
)
from corridorsim.engine import TIME_LIMIT, run_simulation
from corridorsim.plans import ProfileBuilder, cruise_profile
from corridorsim.scenario import (
    ScenarioConfig,
    disturbance_timeline,
    with_mode_label,
    with_scenario_label,
)


def dfr_config(d_prop=0.2, tau=15.0, first_onset=120.0, enabled=True, **top):
    cfg = with_mode_label(ScenarioConfig(), "DFR2")
    cfg = dataclasses.replace(
        cfg,
        dfr=dataclasses.replace(cfg.dfr, d_prop=d_prop),
        disturbance=dataclasses.replace(
            cfg.disturbance, enabled=enabled, tau=tau, first_onset=first_onset,
            t_inv=None),
        **top,
    )
    return cfg


def make_scheduler(cfg):
    events = []
    sch = Scheduler(cfg, disturbance_timeline(cfg),
                    lambda kind, t, vid, **data: events.append(
                        (kind, t, vid, data)))
    return sch, events


# -- admissions ---------------------------------------------------------------


def test_first_entry_admitted_with_cruise_etas():
    sch, _ = make_scheduler(dfr_config(enabled=False))
    assert sch.request_entry(0, 0.0, 0.0) == 0.0
    etas = sch.schedules[0].etas
    assert etas == {k: pytest.approx(15.0 * k) for k in range(1, 11)}


def test_entry_etas_translate_with_time():
    sch, _ = make_scheduler(dfr_config(enabled=False))
    sch.request_entry(0, 10.0, 10.0)
    assert sch.schedules[0].etas[10] == pytest.approx(160.0)


def test_entries_at_four_seconds_admitted_unmodified():
    sch, _ = make_scheduler(dfr_config(enabled=False))
    for vid, want in enumerate([0.0, 4.0, 8.0]):
        assert sch.request_entry(vid, want, want) == want


def test_entries_at_two_seconds_pushed_to_buffer():
    sch, _ = make_scheduler(dfr_config(enabled=False))
    assert sch.request_entry(0, 0.0, 0.0) == 0.0
    assert sch.request_entry(1, 2.0, 2.0) == pytest.approx(3.0)
    assert sch.request_entry(2, 4.0, 4.0) == pytest.approx(6.0)


# -- conflict test -------------------------------------------------------------


def crossing_plan(t_at_xs, speed=20.0):
    """Cruise plan whose front reaches x=2000 at the given time."""
    return cruise_profile(t_at_xs - 2000.0 / speed, speed)


def test_plan_conflicts_on_window_overlap():
    cfg = dfr_config()
    dist = disturbance_timeline(cfg)[0]
    assert plan_conflicts(crossing_plan(118.0), dist)  # inside at onset
    assert plan_conflicts(crossing_plan(121.0), dist)  # enters mid-window
    assert not plan_conflicts(crossing_plan(117.0), dist)  # clear by 119.5
    assert not plan_conflicts(crossing_plan(130.1), dist)  # enters after end


def test_plan_conflicts_ignores_vehicles_past_the_region():
    cfg = dfr_config()
    dist = disturbance_timeline(cfg)[0]
    past = cruise_profile(0.0, 20.0)
    past.xs[0] = 2060.0
    assert not plan_conflicts(past, dist)


# -- forecast fan-out ----------------------------------------------------------


def seeded_conflicts(cfg, entries):
    """Scheduler with cruise vehicles entered at the given times."""
    sch, events = make_scheduler(cfg)
    for vid, t0 in enumerate(entries):
        sch.request_entry(vid, t0, t0)
    return sch, events


def test_updates_stagger_by_propagation_delay_nearest_first():
    cfg = dfr_config(d_prop=0.2)
    # Cruise crossings of the region overlap [120, 130] for entries in
    # [17.5, 30]: all three conflict, at distinct distances from the region.
    sch, events = seeded_conflicts(cfg, [18.0, 21.0, 24.0])
    positions = {vid: 20.0 * (105.0 - t0)
                 for vid, t0 in enumerate([18.0, 21.0, 24.0])}
    sch.on_forecast(0, 105.0, positions, set())

    released = [e for e in events if e[0] == "FORECAST_RELEASED"]
    assert len(released) == 1 and released[0][3]["updates"] == 3

    assert sch.pop_due_update(104.9) is None
    seen = []
    for t_tick in [105.0, 105.2, 105.4]:
        upd = sch.pop_due_update(t_tick)
        assert upd is not None
        assert upd.apply_time == pytest.approx(t_tick, abs=1e-9)
        assert sch.pop_due_update(t_tick) is None  # one slot per step
        seen.append(upd.vehicle)
    # nearest to the region first: highest position = earliest entry
    assert seen == [0, 1, 2]


def test_updates_stagger_with_slow_propagation():
    cfg = dfr_config(d_prop=3.0)
    sch, _ = seeded_conflicts(cfg, [18.0, 24.0])
    sch.on_forecast(0, 105.0, {0: 1740.0, 1: 1620.0}, set())
    first = sch.pop_due_update(105.0)
    assert first.vehicle == 0 and first.apply_time == pytest.approx(105.0)
    assert sch.pop_due_update(107.9) is None
    second = sch.pop_due_update(108.0)
    assert second.vehicle == 1 and second.apply_time == pytest.approx(108.0)


def test_no_conflicts_no_updates():
    cfg = dfr_config()
    sch, _ = seeded_conflicts(cfg, [0.0, 5.0])  # both clear long before onset
    sch.on_forecast(0, 105.0, {0: 2100.0, 1: 2000.0}, set())
    assert sch.pop_due_update(200.0) is None


# -- replan branches ----------------------------------------------------------


def apply_single_update(cfg, entry_time, t_apply):
    sch, events = seeded_conflicts(cfg, [entry_time])
    x = 20.0 * (t_apply - entry_time)
    sch.on_forecast(0, t_apply, {0: x}, set())
    upd = sch.pop_due_update(t_apply)
    assert upd is not None
    sch.apply_update(upd, t_apply, (x, 20.0))
    return sch.schedules[0].plan, events


def test_replan_accelerates_through_when_it_clears_the_onset():
    # 350 m from the far edge with 15 s of warning: the speed-up exits the
    # region before it activates, so no delay is inserted.
    plan, events = apply_single_update(dfr_config(), 20.0, 105.0)
    assert plan.eta_at(2050.0) < 120.0 - 1e-6
    assert not any(e[0] == "EMERGENCY" for e in events)
    assert max(plan.vs) > 20.0 + 1e-6  # it actually speeds up


def test_replan_delays_to_the_window_end_when_passing_is_out_of_reach():
    # 450 m out, the fastest run reaches the far edge after the onset: the
    # plan must instead arrive at the region edge after the window clears.
    cfg = dfr_config()
    plan, events = apply_single_update(cfg, 25.0, 105.0)
    gate = 2000.0 - DELAY_STANDOFF_M
    dist = disturbance_timeline(cfg)[0]
    assert plan.eta_at(gate) >= dist.t_end + 2 * cfg.dt - 1e-6
    assert plan.eta_at(3000.0) < math.inf
    assert not any(e[0] == "EMERGENCY" for e in events)


def test_replan_reports_emergency_when_neither_branch_fits():
    # Practically on top of the region edge at full speed with half a second
    # of warning: passing misses the onset and no brake rests in time. The
    # replan says so instead of pretending.
    cfg = dfr_config(tau=0.5)
    plan, events = apply_single_update(cfg, 19.75, 119.5)  # x = 1995
    assert any(e[0] == "EMERGENCY" for e in events)
    # The plan cannot honor the window: it still crosses into the region
    # during the active time, which the run loop will terminate on.
    dist = disturbance_timeline(cfg)[0]
    assert plan_conflicts(plan, dist)


# -- plan tracking ------------------------------------------------------------


def test_tracking_is_pure_feedforward_on_plan():
    cfg = dfr_config(enabled=False)
    plan = cruise_profile(0.0, 20.0)
    a = tracking_acceleration(plan.position_at(7.0), 20.0, plan, 7.0, cfg)
    assert a == 0.0


def test_tracking_corrects_toward_plan():
    cfg = dfr_config(enabled=False)
    plan = cruise_profile(0.0, 20.0)
    behind = tracking_acceleration(plan.position_at(7.0) - 1.0, 20.0, plan, 7.0, cfg)
    ahead = tracking_acceleration(plan.position_at(7.0) + 1.0, 20.0, plan, 7.0, cfg)
    slow = tracking_acceleration(plan.position_at(7.0), 19.0, plan, 7.0, cfg)
    assert behind == pytest.approx(1.0) and ahead == pytest.approx(-1.0)
    assert slow == pytest.approx(2.0)
    assert tracking_acceleration(0.0, 0.0, plan, 500.0, cfg) == cfg.a_max  # clamped


# -- end-to-end reservation discipline ----------------------------------------


def test_reservations_hold_the_relaxed_floor_under_pressure():
    # Densest arrivals against the harshest disturbance cadence: buffers get
    # relaxed, some moments go by emergency braking, but the ledger never
    # books two vehicles closer than the relaxed floor and nobody collides.
    cfg = with_scenario_label(with_mode_label(ScenarioConfig(), "DFR2"),
                              "inv40_tau15")
    cfg = dataclasses.replace(cfg, arrival_rate=0.25, sim_end=600.0)
    res = run_simulation(cfg)
    assert res.termination == TIME_LIMIT
    assert res.min_separation > 0.0
    assert any(e.kind == "BUFFER_RELAXED" for e in res.events)

    final = {}
    for t, vid, cwp, eta in res.trace_rows:
        final[(vid, cwp)] = eta
    per_cwp = defaultdict(dict)
    for (vid, cwp), eta in final.items():
        per_cwp[cwp][vid] = eta
    floor = cfg.dfr.t_buffer_min
    for cwp, etas in per_cwp.items():
        vids = sorted(etas)
        for a, b in zip(vids, vids[1:]):
            if b == a + 1:
                assert etas[b] - etas[a] >= floor - 1e-6, (cwp, a, b)
