"""Cost terms over path points and their finite-difference gradients.

Three terms enter the objective: obstacle cost (path points plus body
samples), segment-length deviation and end-orientation error.  Gradients are
central differences in which every perturbed configuration is rebuilt, since
moving one path point re-bends all downstream segments.  All perturbations of
one iteration are stacked into a single batch and evaluated together.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import (
    SemicircularDegenerate,
    DegenerateSegment,
    _arc_lengths,
    _norm,
    build_spline,
    control_points,
    end_tangents,
    eval_arcs,
    unit,
)

logger = logging.getLogger(__name__)

FD_RETRIES = 3


@dataclass(frozen=True)
class CostWeights:
    alpha1: float = 1.0       # obstacle term
    alpha2: float = 1.0       # length term
    alpha3: float = 1.0       # orientation term
    beta: float = 1.0         # body-sample blend in the obstacle gradient
    alpha_decay: float = 0.01  # downstream-segment discount in accumulation
    delta_p: float = 1e-3     # central-difference step, mm
    lam: float = 1.0          # regularization of the update

    def __post_init__(self):
        if min(self.alpha1, self.alpha2, self.alpha3, self.beta) < 0:
            raise ValueError("cost weights must be non-negative")
        if not 0 < self.alpha_decay <= 1:
            raise ValueError("alpha_decay must be in (0, 1]")
        if not (self.delta_p > 0 and self.lam > 0):
            raise ValueError("delta_p and lam must be positive")

    def combine(self, f_obs: float, f_len: float, f_ori: float) -> float:
        return self.alpha1 * f_obs + self.alpha2 * f_len + self.alpha3 * f_ori


@dataclass(frozen=True)
class LengthSpec:
    l_min: float
    l_max: float
    tol: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.l_min < self.l_max:
            raise ValueError("need 0 < l_min < l_max")
        if self.tol is None:
            object.__setattr__(self, "tol", self.l_0 / 10.0)
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def l_0(self) -> float:
        return 0.5 * (self.l_min + self.l_max)

    def scaled(self, factor: float) -> "LengthSpec":
        return LengthSpec(self.l_min * factor, self.l_max * factor, self.tol * factor)


@dataclass(frozen=True, eq=False)
class CostContext:
    """Everything the cost terms need besides the path points themselves.

    ``field`` is any object with a vectorized ``cost(points)`` method (a
    :class:`~arcik.field.PotentialGrid` or :class:`~arcik.field.ExactField`),
    or ``None`` for an obstacle-free workspace.  ``obstacles`` are the exact
    spheres, used for clearance checks regardless of how costs are sampled.
    """

    start: np.ndarray
    base_orientation: np.ndarray
    length_spec: LengthSpec
    field: object = None
    target_dir: Optional[np.ndarray] = None
    samples_per_segment: int = 8
    pin_end: bool = True
    obstacles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float).reshape(3))
        object.__setattr__(
            self, "base_orientation", np.asarray(self.base_orientation, dtype=float).reshape(3)
        )
        if self.target_dir is not None:
            object.__setattr__(self, "target_dir", unit(np.asarray(self.target_dir, dtype=float)))
        if self.samples_per_segment < 2:
            raise ValueError("samples_per_segment must be >= 2")

    def n_free(self, n: int) -> int:
        return n - 1 if self.pin_end else n


@dataclass
class CostReport:
    f_obs: float
    f_len: float
    f_ori: float
    total_u: float
    grad: np.ndarray
    per_segment_lengths: np.ndarray
    f_path: float = 0.0
    f_arcs: float = 0.0
    grad_obs: np.ndarray = None
    grad_len: np.ndarray = None
    grad_ori: np.ndarray = None
    grad_plain: np.ndarray = None
    degenerate_coords: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# individual terms on a single spline
# ---------------------------------------------------------------------------

def _obstacle_terms(cs, lengths):
    """Per-segment path-point and body-sample obstacle costs from sample costs.

    ``cs`` holds the field cost at (..., n, S) samples with the segment end
    points at sample 0 and S-1.
    """
    ends = 0.5 * (cs[..., 0] + cs[..., -1])
    path = lengths * ends
    # boundary points get their single adjacent segment instead of a mean
    path[..., 0] += 0.5 * lengths[..., 0] * cs[..., 0, 0]
    path[..., -1] += 0.5 * lengths[..., -1] * cs[..., -1, -1]
    s = cs.shape[-1]
    arcs = lengths / (s - 1) * (cs[..., 1:-1].sum(axis=-1) + ends)
    return path, arcs


def path_obstacle_cost(pts, spline, grid) -> float:
    """Sum of point costs times the mean length of the adjacent arcs."""
    p = np.vstack([spline.start[None, :], np.asarray(pts, dtype=float)])
    cost = np.asarray(grid.cost(p))
    lengths = spline.lengths
    v = np.empty(len(p))
    v[0] = lengths[0]
    v[-1] = lengths[-1]
    v[1:-1] = 0.5 * (lengths[:-1] + lengths[1:])
    return float(np.sum(cost * v))


def body_cost(spline, grid, samples_per_segment: int = 8) -> float:
    """Arc-length weighted trapezoid sum of the field over body samples."""
    if samples_per_segment < 2:
        raise ValueError("samples_per_segment must be >= 2")
    u = np.linspace(0.0, 1.0, samples_per_segment)
    samples = eval_arcs(spline.starts, spline.points, spline.controls, spline.omega, u)
    cs = np.asarray(grid.cost(samples))
    _, arcs = _obstacle_terms(cs, spline.lengths)
    return float(arcs.sum())


def length_cost(spline, spec: LengthSpec) -> float:
    return float(np.sum((spline.lengths - spec.l_0) ** 2))


def orientation_cost(spline, target_dir) -> float:
    """Norm of the difference between the end tangent and the target direction."""
    return float(np.linalg.norm(spline.end_tangent - unit(np.asarray(target_dir, dtype=float))))


def orientation_error(spline, target_dir) -> float:
    """Angle in radians between the end tangent and the target direction."""
    t = spline.end_tangent
    g = unit(np.asarray(target_dir, dtype=float))
    return float(np.arctan2(np.linalg.norm(np.cross(t, g)), t @ g))


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def numerical_gradient(f: Callable[[np.ndarray], float], pts, delta_p: float,
                       n_free: Optional[int] = None) -> np.ndarray:
    """Central-difference gradient of ``f`` with respect to the first ``n_free`` points.

    A perturbation that makes the spline degenerate is retried with a step ten
    times smaller, up to three times; after that the entry is left at zero.
    """
    pts = np.array(pts, dtype=float)
    n_free = pts.shape[0] if n_free is None else n_free
    grad = np.zeros((n_free, 3))
    for i in range(n_free):
        for k in range(3):
            step = delta_p
            for _ in range(FD_RETRIES + 1):
                plus, minus = pts.copy(), pts.copy()
                plus[i, k] += step
                minus[i, k] -= step
                try:
                    grad[i, k] = (f(plus) - f(minus)) / (2.0 * step)
                    break
                except (SemicircularDegenerate, DegenerateSegment):
                    step /= 10.0
            else:
                logger.info("degenerate perturbation at point %d axis %d; gradient set to 0", i, k)
    return grad


def scaled_accumulate(per_segment_grads, alpha_decay: float) -> np.ndarray:
    """Combine per-segment gradients with a geometric downstream discount.

    ``per_segment_grads[j, i]`` is the derivative of segment ``j``'s cost with
    respect to point ``i``; the result for point ``i`` is
    ``sum_{j >= i} alpha_decay**(j - i) * per_segment_grads[j, i]``.
    """
    g = np.asarray(per_segment_grads, dtype=float)
    n_seg, n_pts = g.shape[:2]
    j = np.arange(n_seg)[:, None]
    i = np.arange(n_pts)[None, :]
    lag = j - i
    scale = np.where(lag >= 0, float(alpha_decay) ** np.maximum(lag, 0), 0.0)
    return np.einsum("ji,ji...->i...", scale, g)


# ---------------------------------------------------------------------------
# batched assembly
# ---------------------------------------------------------------------------

@dataclass
class _Terms:
    path: np.ndarray  # (B, n) per segment
    arcs: np.ndarray  # (B, n)
    length: np.ndarray  # (B, n)
    ori: np.ndarray  # (B,)
    lengths: np.ndarray  # (B, n)
    bad: np.ndarray  # (B,)


def evaluate_batch(ctx: CostContext, P: np.ndarray) -> _Terms:
    """Per-segment cost terms for a stack of configurations ``P`` (B, n, 3)."""
    a, c, omega, bad = control_points(ctx.start, ctx.base_orientation, P)
    lengths = _arc_lengths(a, P, c)
    spec = ctx.length_spec
    length = (lengths - spec.l_0) ** 2
    if ctx.field is not None:
        u = np.linspace(0.0, 1.0, ctx.samples_per_segment)
        samples = eval_arcs(a, P, c, omega, u)
        cs = np.asarray(ctx.field.cost(samples))
        path, arcs = _obstacle_terms(cs, lengths)
    else:
        path = np.zeros_like(lengths)
        arcs = np.zeros_like(lengths)
    if ctx.target_dir is not None:
        t_end = end_tangents(P[..., -1, :], c[..., -1, :])
        ori = _norm(t_end - ctx.target_dir)
    else:
        ori = np.zeros(P.shape[:-2])
    return _Terms(path, arcs, length, ori, lengths, bad.any(axis=-1))


def _perturbations(P, n_free, steps):
    """Stack base config plus +/- perturbations: row 1 + 2*(3*i + k) + {0, 1}."""
    m = n_free
    batch = np.broadcast_to(P, (1 + 6 * m,) + P.shape).copy()
    for i in range(m):
        for k in range(3):
            r = 1 + 2 * (3 * i + k)
            batch[r, i, k] += steps[i, k]
            batch[r + 1, i, k] -= steps[i, k]
    return batch


def cost_values(pts, ctx: CostContext, weights: CostWeights):
    """``(f_obs, f_len, f_ori, U)`` for one configuration, or ``None`` if degenerate."""
    t = evaluate_batch(ctx, np.asarray(pts, dtype=float)[None])
    if t.bad[0]:
        return None
    f_path = float(t.path[0].sum())
    f_arcs = float(t.arcs[0].sum())
    f_obs = f_path + weights.beta * f_arcs
    f_len = float(t.length[0].sum())
    f_ori = float(t.ori[0])
    return f_obs, f_len, f_ori, weights.combine(f_obs, f_len, f_ori)


def total_cost_and_gradient(pts, ctx: CostContext, weights: CostWeights) -> CostReport:
    """Costs at ``pts`` and the update gradient over the free points.

    The obstacle (path + beta * body) and length terms are decomposed per
    segment and combined with :func:`scaled_accumulate`; the orientation
    gradient only acts on the last two free points.  ``grad_plain`` carries the
    undiscounted full gradient of the weighted objective for fallback steps.
    """
    P = np.asarray(pts, dtype=float)
    n = P.shape[0]
    m = ctx.n_free(n)
    delta = weights.delta_p
    steps = np.full((m, 3), delta)
    batch = _perturbations(P, m, steps)
    terms = evaluate_batch(ctx, batch)
    if terms.bad[0]:
        raise SemicircularDegenerate(0, "configuration itself is degenerate")

    degenerate = []
    G = {name: np.zeros((n, m, 3)) for name in ("path", "arcs", "length")}
    g_ori_full = np.zeros((m, 3))
    pending = []

    def take(terms, rows, i, k, step):
        rp, rm = rows
        for name in G:
            arr = getattr(terms, name)
            G[name][:, i, k] = (arr[rp] - arr[rm]) / (2.0 * step)
        g_ori_full[i, k] = (terms.ori[rp] - terms.ori[rm]) / (2.0 * step)

    for i in range(m):
        for k in range(3):
            r = 1 + 2 * (3 * i + k)
            if terms.bad[r] or terms.bad[r + 1]:
                pending.append((i, k))
            else:
                take(terms, (r, r + 1), i, k, delta)

    for i, k in pending:
        step = delta
        for _ in range(FD_RETRIES):
            step /= 10.0
            trial = np.stack([P.copy(), P.copy()])
            trial[0, i, k] += step
            trial[1, i, k] -= step
            tt = evaluate_batch(ctx, trial)
            if not tt.bad.any():
                take(tt, (0, 1), i, k, step)
                break
        else:
            degenerate.append((i, k))
            logger.info("degenerate perturbation at point %d axis %d; gradient set to 0", i, k)

    alpha = weights.alpha_decay
    d_path = scaled_accumulate(G["path"], alpha)
    d_arcs = scaled_accumulate(G["arcs"], alpha)
    d_len = scaled_accumulate(G["length"], alpha)
    g_ori = np.zeros((m, 3))
    g_ori[max(m - 2, 0):] = g_ori_full[max(m - 2, 0):]

    grad_obs = d_path + weights.beta * d_arcs
    grad = weights.alpha1 * grad_obs + weights.alpha2 * d_len + weights.alpha3 * g_ori
    plain = (
        weights.alpha1 * (G["path"].sum(0) + weights.beta * G["arcs"].sum(0))
        + weights.alpha2 * G["length"].sum(0)
        + weights.alpha3 * g_ori_full
    )

    f_path = float(terms.path[0].sum())
    f_arcs = float(terms.arcs[0].sum())
    f_obs = f_path + weights.beta * f_arcs
    f_len = float(terms.length[0].sum())
    f_ori = float(terms.ori[0])
    return CostReport(
        f_obs=f_obs,
        f_len=f_len,
        f_ori=f_ori,
        total_u=weights.combine(f_obs, f_len, f_ori),
        grad=grad,
        per_segment_lengths=terms.lengths[0].copy(),
        f_path=f_path,
        f_arcs=f_arcs,
        grad_obs=grad_obs,
        grad_len=d_len,
        grad_ori=g_ori,
        grad_plain=plain,
        degenerate_coords=degenerate,
    )


def spline_costs(pts, ctx: CostContext):
    """Unweighted ``(f_path, f_arcs, f_len, f_ori)`` via the single-spline functions."""
    spline = build_spline(ctx.start, ctx.base_orientation, pts)
    f_path = path_obstacle_cost(pts, spline, ctx.field) if ctx.field is not None else 0.0
    f_arcs = body_cost(spline, ctx.field, ctx.samples_per_segment) if ctx.field is not None else 0.0
    f_len = length_cost(spline, ctx.length_spec)
    f_ori = orientation_cost(spline, ctx.target_dir) if ctx.target_dir is not None else 0.0
    return f_path, f_arcs, f_len, f_ori


__all__ = [
    "CostContext",
    "CostReport",
    "CostWeights",
    "LengthSpec",
    "body_cost",
    "cost_values",
    "evaluate_batch",
    "length_cost",
    "numerical_gradient",
    "orientation_cost",
    "orientation_error",
    "path_obstacle_cost",
    "scaled_accumulate",
    "spline_costs",
    "total_cost_and_gradient",
]
