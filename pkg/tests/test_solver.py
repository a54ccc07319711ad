from dataclasses import replace

import numpy as np
import pytest

from arcik import scenario_io
from arcik.costs import LengthSpec
from arcik.field import Box
from arcik.optimizer import Outcome
from arcik.solver import (
    Scenario,
    TrackingRun,
    UnreachableTarget,
    build_context,
    scaled_scenario,
    scaling_experiment,
    solve,
    track,
)

WORKSPACE = Box((-300, -300, -320), (300, 300, 60))


def scenario(target, **kw):
    return Scenario(start=(0, 0, 0), base_orientation=(0, 0, -1), target=target, n_segments=5,
                    length_spec=LengthSpec(45, 70), workspace_bounds=WORKSPACE, **kw)


def test_unreachable():
    sc = scenario((0, 0, -300), target_orientation=(0, 0, -1))
    sc = replace(sc, length_spec=LengthSpec(20, 50))
    with pytest.raises(UnreachableTarget):
        solve(sc)


def test_target_outside_workspace():
    with pytest.raises(ValueError):
        scenario((0, 0, 100))


def test_straight_target_needs_no_iterations():
    sc = scenario((0, 0, -287.5), target_orientation=(0, 0, -1))
    spline, status = solve(sc)
    assert status.outcome is Outcome.CONSTRAINTS_SATISFIED
    assert status.iterations == 0
    assert np.all(spline.omega == 1.0)
    np.testing.assert_allclose(spline.lengths, 57.5)


def test_solution_is_pinned():
    sc = scenario((-10, 40, -260), target_orientation=(0, 0.2169, -0.9762))
    spline, status = solve(sc)
    assert status.outcome is Outcome.CONSTRAINTS_SATISFIED
    assert np.array_equal(spline.end_point, sc.target)
    assert np.array_equal(spline.start, sc.start)
    assert np.array_equal(spline.base_orientation, sc.base_orientation)


def test_orientation_free_scenario_zeroes_term():
    sc = scenario((60, 30, -240))
    spline, status = solve(sc)
    assert status.outcome is Outcome.CONSTRAINTS_SATISFIED
    assert status.final_report.f_ori == 0.0
    assert status.check.ori_error is None


def test_warm_start_repeated_waypoint():
    sf = scenario_io.bundled("track_180")
    wp = sf.waypoints[40]
    run = track(TrackingRun(sf.scenario, np.repeat(wp[None], 4, axis=0)))
    assert all(s.outcome is Outcome.CONSTRAINTS_SATISFIED for s in run.per_waypoint)
    assert [s.iterations for s in run.per_waypoint[1:]] == [0, 0, 0]
    for cfg in run.configurations:
        assert np.array_equal(cfg[-1], wp)


def test_tracking_skips_unreachable_waypoint():
    sc = replace(scenario((50, 0, -250)), length_spec=LengthSpec(40, 60))
    # the middle waypoint is ~463 mm away, beyond 5 x 60 mm
    wps = np.array([[50, 0, -250], [250, 250, -300], [55, 0, -250]], dtype=float)
    run = track(TrackingRun(sc, wps))
    outcomes = [s.outcome for s in run.per_waypoint]
    assert outcomes == [Outcome.CONSTRAINTS_SATISFIED, Outcome.DEGENERATE,
                        Outcome.CONSTRAINTS_SATISFIED]
    assert run.configurations[1] is None


def test_scaled_scenario_keeps_total_length():
    base = scenario((60, 30, -240))
    totals = {n: n * scaled_scenario(base, n).length_spec.l_0 for n in range(5, 11)}
    np.testing.assert_allclose(list(totals.values()), 5 * 57.5)
    sc = scaled_scenario(base, 10)
    assert sc.length_spec.tol == pytest.approx(sc.length_spec.l_0 / 10)


def test_scaling_single_row():
    base = scenario_io.bundled("bench").scenario
    rows = scaling_experiment(base, [5], 1)
    assert len(rows) == 1 and rows[0].n == 5
    assert rows[0].mean_iterations > 0
    assert rows[0].mean_time_per_iteration > 0


def test_scaling_threads_match_serial(monkeypatch):
    base = scenario_io.bundled("bench").scenario
    serial = scaling_experiment(base, [6], 3)
    monkeypatch.setenv("ARCIK_THREADS", "3")
    threaded = scaling_experiment(base, [6], 3)
    assert serial[0].mean_iterations == threaded[0].mean_iterations


def test_context_uses_grid_by_default():
    sc = scenario_io.bundled("track_180").scenario
    ctx = build_context(sc)
    assert ctx.field.spacing == sc.field_params.epsilon / 4
    assert len(ctx.obstacles) == 60
