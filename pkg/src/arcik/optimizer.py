"""Preconditioned gradient descent over the free path points."""
from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .costs import (
    CostContext,
    CostReport,
    CostWeights,
    cost_values,
    orientation_error,
    total_cost_and_gradient,
)
from .field import signed_distance
from .geometry import DegenerateSegment, SemicircularDegenerate, build_spline, sample_body

logger = logging.getLogger(__name__)


class StepDegenerate(RuntimeError):
    pass


class Outcome(str, enum.Enum):
    CONSTRAINTS_SATISFIED = "ConstraintsSatisfied"
    MAX_ITERATIONS = "MaxIterations"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True, eq=False)
class AccelerationMatrix:
    A: np.ndarray
    A_inv: np.ndarray

    @property
    def size(self) -> int:
        return self.A.shape[0]


def second_difference(n_free: int) -> np.ndarray:
    """Second-difference operator with the fixed neighbours clamped out."""
    if n_free == 1:
        return np.eye(1)
    return 2.0 * np.eye(n_free) - np.eye(n_free, k=1) - np.eye(n_free, k=-1)


def build_acceleration_matrix(n_free: int, sigma: float = 1e-6) -> AccelerationMatrix:
    if n_free < 1:
        raise ValueError("need at least one free point")
    K = second_difference(n_free)
    A = K.T @ K + sigma * np.eye(n_free)
    A_inv = np.linalg.inv(A)
    A_inv = 0.5 * (A_inv + A_inv.T)
    A.setflags(write=False)
    A_inv.setflags(write=False)
    return AccelerationMatrix(A, A_inv)


def project_obstacle_update(delta, pts, start) -> np.ndarray:
    """Drop the along-path component of each free point's obstacle update.

    The path direction at point ``i`` is the chord between its neighbours
    (one-sided at a free end).
    """
    delta = np.array(delta, dtype=float)
    pts = np.asarray(pts, dtype=float)
    m = delta.shape[0]
    chain = np.vstack([np.asarray(start, dtype=float)[None, :], pts])
    for i in range(m):
        prev = chain[i]
        nxt = chain[i + 2] if i + 2 < len(chain) else chain[i + 1]
        chord = nxt - prev
        norm = np.linalg.norm(chord)
        if norm == 0.0:
            continue
        u = chord / norm
        delta[i] -= (delta[i] @ u) * u
    return delta


def step(pts, grad, A: AccelerationMatrix, weights: CostWeights, scale: float = 1.0) -> np.ndarray:
    """``free <- free - (scale / lam) * A^-1 grad``; fixed points are untouched."""
    pts = np.asarray(pts, dtype=float)
    grad = np.asarray(grad, dtype=float)
    m = A.size
    if grad.shape != (m, 3):
        raise ValueError(f"gradient shape {grad.shape} does not match {m} free points")
    new = pts.copy()
    new[:m] = pts[:m] - (scale / weights.lam) * (A.A_inv @ grad)
    chain = np.vstack([np.full((1, 3), np.nan), new])
    if np.any(np.all(chain[1:] == chain[:-1], axis=1)):
        raise StepDegenerate("consecutive path points coincide")
    return new


@dataclass(frozen=True)
class AnnealState:
    temperature: float
    cooling_rate: float
    base_weights: CostWeights
    rng_seed: int = 0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if not 0 < self.cooling_rate < 1:
            raise ValueError("cooling_rate must be in (0, 1)")

    def temperature_at(self, iteration: int) -> float:
        return self.temperature * self.cooling_rate ** iteration


def anneal_weights(state: AnnealState, iteration: int) -> CostWeights:
    """Jitter the length and orientation weights by a cooling random factor."""
    if iteration < 0:
        raise ValueError("iteration must be >= 0")
    temp = state.temperature_at(iteration)
    base = state.base_weights
    if temp == 0.0:
        return base
    rng = np.random.default_rng([state.rng_seed & 0xFFFFFFFFFFFFFFFF, iteration])
    u2, u3 = rng.uniform(-1.0, 1.0, size=2)
    return replace(base, alpha2=base.alpha2 * (1.0 + temp * u2),
                   alpha3=base.alpha3 * (1.0 + temp * u3))


@dataclass(frozen=True)
class SolverConfig:
    ori_tol: float = 0.0175
    anneal_t0: float = 0.5
    cooling_rate: float = 0.95
    max_halvings: int = 5
    samples_per_segment: int = 8
    clearance_samples: int = 16
    pin_end: bool = True
    use_grid: bool = True
    grid_spacing: Optional[float] = None
    sigma: float = 1e-6


@dataclass(frozen=True)
class ConstraintCheck:
    max_length_dev: float
    ori_error: Optional[float]
    min_clearance: float
    satisfied: bool


@dataclass
class SolveStatus:
    outcome: Outcome
    iterations: int
    final_report: Optional[CostReport]
    wall_time: float
    check: Optional[ConstraintCheck] = None


def check_constraints(pts, ctx: CostContext, config: SolverConfig) -> Optional[ConstraintCheck]:
    try:
        spline = build_spline(ctx.start, ctx.base_orientation, pts)
    except (SemicircularDegenerate, DegenerateSegment):
        return None
    dev = float(np.max(np.abs(spline.lengths - ctx.length_spec.l_0)))
    ori = orientation_error(spline, ctx.target_dir) if ctx.target_dir is not None else None
    clearance = float("inf")
    if ctx.obstacles:
        body = sample_body(spline, config.clearance_samples)
        clearance = float(np.min(signed_distance(ctx.obstacles, body)))
    ok = dev <= ctx.length_spec.tol and clearance > 0.0
    if ori is not None:
        ok = ok and ori <= config.ori_tol
    return ConstraintCheck(dev, ori, clearance, ok)


def _line_search(pts, direction, u0, A, ctx, weights, max_halvings):
    """Try the full step, then halve; returns ``(pts or None, all_degenerate)``."""
    all_degenerate = True
    scale = 1.0
    for _ in range(max_halvings + 1):
        try:
            trial = step(pts, direction, A, weights, scale)
        except StepDegenerate:
            scale *= 0.5
            continue
        vals = cost_values(trial, ctx, weights)
        if vals is not None:
            all_degenerate = False
            if vals[3] <= u0:
                return trial, False
        scale *= 0.5
    return None, all_degenerate


def solve_loop(initial, ctx: CostContext, weights: CostWeights, config: SolverConfig = SolverConfig(),
               max_iterations: int = 150, seed: int = 0, history: Optional[list] = None):
    """Iterate until every constraint holds or the iteration budget runs out.

    Each iteration anneals the constraint weights, assembles the gradient,
    projects the obstacle part off the path direction, preconditions with the
    inverse acceleration matrix and backtracks (halving) until the annealed
    objective does not increase.  If the discounted direction cannot descend,
    the plain full gradient is tried instead.

    Returns ``(points, SolveStatus)``.  Without convergence the lowest-cost
    iterate (under the base weights) is returned.
    """
    t0 = time.perf_counter()
    pts = np.array(initial, dtype=float)
    n = pts.shape[0]
    m = ctx.n_free(n)
    if history is not None:
        history.append(pts.copy())

    base_vals = cost_values(pts, ctx, weights)
    if base_vals is None:
        return pts, SolveStatus(Outcome.DEGENERATE, 0, None, time.perf_counter() - t0)
    best_u, best_pts = base_vals[3], pts
    A = build_acceleration_matrix(m, config.sigma) if m > 0 else None
    anneal = AnnealState(config.anneal_t0, config.cooling_rate, weights, seed)

    outcome = Outcome.MAX_ITERATIONS
    k = 0
    while True:
        chk = check_constraints(pts, ctx, config)
        if chk is not None and chk.satisfied:
            outcome = Outcome.CONSTRAINTS_SATISFIED
            best_pts = pts
            break
        if k >= max_iterations or A is None:
            break
        w = anneal_weights(anneal, k)
        report = total_cost_and_gradient(pts, ctx, w)
        obs = project_obstacle_update(report.grad_obs, pts, ctx.start)
        direction = w.alpha1 * obs + w.alpha2 * report.grad_len + w.alpha3 * report.grad_ori
        new, degenerate = _line_search(pts, direction, report.total_u, A, ctx, w, config.max_halvings)
        if new is None:
            new, degenerate2 = _line_search(pts, report.grad_plain, report.total_u, A, ctx, w,
                                            config.max_halvings)
            degenerate = degenerate and degenerate2
        k += 1
        if new is None:
            if degenerate:
                outcome = Outcome.DEGENERATE
                break
            if anneal.temperature_at(k) == 0.0:
                # deterministic stall: nothing will change on later iterations
                break
            continue
        pts = new
        if history is not None:
            history.append(pts.copy())
        u = cost_values(pts, ctx, weights)[3]
        if u < best_u:
            best_u, best_pts = u, pts

    wall = time.perf_counter() - t0
    final = total_cost_and_gradient(best_pts, ctx, weights)
    return best_pts, SolveStatus(outcome, k, final, wall, check_constraints(best_pts, ctx, config))
