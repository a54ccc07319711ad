"""Scenario-level IK: cold solves, warm-started path tracking and the scaling sweep."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .costs import CostContext, CostWeights, LengthSpec
from .field import Box, ExactField, FieldParams, build_grid
from .geometry import ArcSpline, as_vec3, build_spline, initial_guess, unit
from .optimizer import Outcome, SolverConfig, SolveStatus, solve_loop

logger = logging.getLogger(__name__)

DEFAULT_WEIGHTS = CostWeights(alpha1=1.0, alpha2=3.0, alpha3=300.0, beta=1.0,
                              alpha_decay=0.01, delta_p=1e-3, lam=3.0)


class UnreachableTarget(ValueError):
    pass


def _normalized(v: np.ndarray) -> np.ndarray:
    # leave already-unit vectors untouched so file round trips are byte-stable
    if abs(float(np.linalg.norm(v)) - 1.0) <= 1e-12:
        return v
    return unit(v)


@dataclass(frozen=True, eq=False)
class Scenario:
    start: np.ndarray
    base_orientation: np.ndarray
    target: np.ndarray
    n_segments: int
    length_spec: LengthSpec
    workspace_bounds: Box
    target_orientation: Optional[np.ndarray] = None
    obstacles: tuple = ()
    field_params: FieldParams = FieldParams()
    weights: CostWeights = DEFAULT_WEIGHTS
    seed: int = 0
    max_iterations: int = 150
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        object.__setattr__(self, "start", as_vec3(self.start))
        v = as_vec3(self.base_orientation)
        if abs(np.linalg.norm(v) - 1.0) > 1e-6:
            raise ValueError("base_orientation must be unit length")
        object.__setattr__(self, "base_orientation", _normalized(v))
        object.__setattr__(self, "target", as_vec3(self.target))
        if self.target_orientation is not None:
            t = as_vec3(self.target_orientation)
            object.__setattr__(self, "target_orientation", _normalized(t))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.n_segments < 1:
            raise ValueError("n_segments must be >= 1")
        if not self.workspace_bounds.contains(self.target):
            raise ValueError("target lies outside the workspace bounds")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")

    def reachable(self, target=None) -> bool:
        target = self.target if target is None else target
        dist = float(np.linalg.norm(np.asarray(target) - self.start))
        return self.n_segments * self.length_spec.l_max >= dist

    def with_target(self, target) -> "Scenario":
        return replace(self, target=target)


def build_context(scenario: Scenario, obstacle_field=None) -> CostContext:
    """Cost context for ``scenario``; builds the potential grid unless one is given.

    Orientation weight is dropped when the scenario has no target orientation.
    """
    cfg = scenario.solver
    if obstacle_field is None and scenario.obstacles:
        if cfg.use_grid:
            spacing = cfg.grid_spacing or scenario.field_params.epsilon / 4.0
            obstacle_field = build_grid(scenario.obstacles, scenario.workspace_bounds, spacing,
                                        scenario.field_params)
        else:
            obstacle_field = ExactField(scenario.obstacles, scenario.field_params)
    return CostContext(
        start=scenario.start,
        base_orientation=scenario.base_orientation,
        length_spec=scenario.length_spec,
        field=obstacle_field,
        target_dir=scenario.target_orientation,
        samples_per_segment=cfg.samples_per_segment,
        pin_end=cfg.pin_end,
        obstacles=scenario.obstacles,
    )


def _weights(scenario: Scenario) -> CostWeights:
    if scenario.target_orientation is None:
        return replace(scenario.weights, alpha3=0.0)
    return scenario.weights


def solve(scenario: Scenario, obstacle_field=None, initial=None,
          history: Optional[list] = None) -> tuple[ArcSpline, SolveStatus]:
    """Solve one IK problem; cold-starts from the single connecting arc by default.

    Raises:
        UnreachableTarget: the fully stretched robot cannot reach the target.
    """
    if not scenario.reachable():
        raise UnreachableTarget(
            f"target at {np.linalg.norm(scenario.target - scenario.start):.3f} mm exceeds "
            f"{scenario.n_segments} x {scenario.length_spec.l_max} mm"
        )
    ctx = build_context(scenario, obstacle_field)
    return _solve_with(scenario, ctx, initial, history)


def _solve_with(scenario, ctx, initial=None, history=None, seed=None):
    if initial is None:
        initial = initial_guess(scenario.start, scenario.base_orientation, scenario.target,
                                scenario.n_segments)
    pts = np.array(initial, dtype=float)
    if scenario.solver.pin_end:
        pts[-1] = scenario.target
    seed = scenario.seed if seed is None else seed
    pts, status = solve_loop(pts, ctx, _weights(scenario), scenario.solver,
                             max_iterations=scenario.max_iterations, seed=seed, history=history)
    try:
        spline = build_spline(scenario.start, scenario.base_orientation, pts)
    except ValueError:
        spline = None
    return spline, status


@dataclass
class TrackingRun:
    scenario: Scenario
    waypoints: np.ndarray
    per_waypoint: list = field(default_factory=list)
    configurations: list = field(default_factory=list)

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=float).reshape(-1, 3)


def track(run: TrackingRun, obstacle_field=None, warm_start: bool = True) -> TrackingRun:
    """Solve the waypoints in order, warm-starting each from the last success.

    A warm start reuses the previous configuration with only the end point
    moved to the new waypoint.  Failed waypoints are recorded and skipped;
    if the warm start is itself degenerate the waypoint is cold-started.
    """
    scenario = run.scenario
    if len(run.waypoints) and not scenario.reachable(run.waypoints[0]):
        raise UnreachableTarget("first waypoint is out of reach")
    ctx = build_context(scenario, obstacle_field)
    out = TrackingRun(scenario, run.waypoints)
    last_good = None
    for wp in run.waypoints:
        sc = scenario.with_target(wp)
        if not sc.reachable():
            status = SolveStatus(Outcome.DEGENERATE, 0, None, 0.0)
            out.per_waypoint.append(status)
            out.configurations.append(None)
            continue
        initial = None
        if warm_start and last_good is not None:
            initial = last_good.copy()
            initial[-1] = wp
        spline, status = _solve_with(sc, ctx, initial)
        if initial is not None and status.outcome is Outcome.DEGENERATE:
            spline, status = _solve_with(sc, ctx, None)
        out.per_waypoint.append(status)
        out.configurations.append(None if spline is None else np.array(spline.points))
        if status.outcome is Outcome.CONSTRAINTS_SATISFIED:
            last_good = np.array(spline.points)
    return out


@dataclass(frozen=True)
class ScalingRow:
    n: int
    mean_time_per_iteration: float
    mean_iterations: float
    mean_total_time: float


def scaled_scenario(base: Scenario, n: int) -> Scenario:
    """Same robot length split into ``n`` segments."""
    factor = base.n_segments / n
    return replace(base, n_segments=n, length_spec=base.length_spec.scaled(factor))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ARCIK_THREADS", "1")))
    except ValueError:
        return 1


def scaling_experiment(base: Scenario, n_values, repeats: int,
                       obstacle_field=None) -> list[ScalingRow]:
    """Mean per-iteration time and iteration count for each segment count.

    Total robot length is held at ``base.n_segments * l_0``; repeat ``r`` runs
    with seed ``base.seed + r``.
    """
    n_values = list(n_values)
    if not n_values or repeats < 1:
        raise ValueError("need at least one segment count and one repeat")
    if obstacle_field is None and base.obstacles:
        obstacle_field = build_context(base).field
    rows = []
    for n in n_values:
        sc = scaled_scenario(base, n)
        ctx = build_context(sc, obstacle_field)

        def one(r, sc=sc, ctx=ctx):
            _, status = _solve_with(sc, ctx, seed=base.seed + r)
            return status

        if _threads() > 1:
            with ThreadPoolExecutor(_threads()) as pool:
                statuses = list(pool.map(one, range(repeats)))
        else:
            statuses = [one(r) for r in range(repeats)]
        its = np.array([s.iterations for s in statuses], dtype=float)
        walls = np.array([s.wall_time for s in statuses])
        per_it = walls[its > 0] / its[its > 0]
        rows.append(ScalingRow(
            n=n,
            mean_time_per_iteration=float(per_it.mean()) if per_it.size else 0.0,
            mean_iterations=float(its.mean()),
            mean_total_time=float(walls.mean()),
        ))
    return rows
