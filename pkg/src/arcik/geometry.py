"""G1 piecewise circular-arc splines built from rational quadratic Bezier arcs.

A manipulator configuration is fully determined by the base point, the base
orientation and the ordered segment end points ("path points").  Each segment
is a circular arc ``(a, b, c, omega)`` whose control point ``c`` lies on the
bisector plane of the chord ``ab``; the control point of segment ``i + 1`` is
placed on the tangent ray leaving segment ``i`` so every joint is G1.

Most functions here accept a leading batch dimension so the optimizer can
evaluate many perturbed configurations in one pass.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative tolerance for "the tangent ray never meets the bisector plane".
_PARALLEL_TOL = 1e-12


class DegenerateSegment(ValueError):
    """Raised when a segment has coincident end points."""

    def __init__(self, index: int = 0, message: str | None = None):
        self.index = index
        super().__init__(message or f"segment {index} has coincident end points")


class SemicircularDegenerate(ValueError):
    """Raised when a segment would need a bend of at least pi.

    The incoming tangent is perpendicular to (or points away from) the chord,
    so the tangent ray never meets the chord's bisector plane in front of the
    segment start.
    """

    def __init__(self, index: int = 0, message: str | None = None):
        self.index = index
        super().__init__(message or f"segment {index} needs a bend of pi or more")


class GoalBehindDegenerate(ValueError):
    """Raised when the goal lies on the backward ray of the base orientation."""


def as_vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite vector {arr}")
    return arr


def unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _norm(v: np.ndarray) -> np.ndarray:
    # explicit component sum keeps batched and scalar calls bit-identical
    return np.sqrt(v[..., 0] * v[..., 0] + v[..., 1] * v[..., 1] + v[..., 2] * v[..., 2])


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2]


# ---------------------------------------------------------------------------
# single segments
# ---------------------------------------------------------------------------

def weight_from_points(a, b, c) -> float:
    """Rational weight of the arc with chord ``ab`` and control point ``c``.

    ``omega = h / sqrt(h^2 + k^2)`` where ``h = |a - m|`` is the half chord and
    ``k = |c - m|`` the control point height above the chord midpoint ``m``.
    """
    a, b, c = as_vec3(a), as_vec3(b), as_vec3(c)
    if np.array_equal(a, b):
        raise DegenerateSegment()
    m = 0.5 * (a + b)
    h = float(_norm(a - m))
    k = float(_norm(c - m))
    return h / np.sqrt(h * h + k * k)


@dataclass(frozen=True, eq=False)
class ArcSegment:
    """One circular arc in rational quadratic Bezier form (minor branch)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    omega: float
    minor: bool = True

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)))
        object.__setattr__(self, "omega", float(self.omega))
        chord = self.b - self.a
        chord2 = float(_dot(chord, chord))
        if chord2 == 0.0:
            raise DegenerateSegment()
        if not self.minor:
            raise NotImplementedError("only the minor arc branch is supported")
        m = 0.5 * (self.a + self.b)
        if abs(float(_dot(self.c - m, chord))) >= 1e-9 * chord2 * max(
            1.0, float(_norm(self.c - m)) / np.sqrt(chord2)
        ):
            raise ValueError("control point is not on the bisector plane of ab")
        expected = weight_from_points(self.a, self.b, self.c)
        if not 0.0 < self.omega <= 1.0 or abs(self.omega - expected) > 1e-9:
            raise ValueError(f"omega {self.omega} inconsistent with control point ({expected})")

    @classmethod
    def from_points(cls, a, b, c) -> "ArcSegment":
        return cls(a, b, c, weight_from_points(a, b, c))

    @property
    def is_straight(self) -> bool:
        return self.omega == 1.0

    @property
    def start_tangent(self) -> np.ndarray:
        return unit(self.c - self.a)

    @property
    def end_tangent(self) -> np.ndarray:
        return unit(self.b - self.c)

    def center_radius(self) -> tuple[np.ndarray, float] | None:
        """Circle center and radius, or ``None`` for a straight segment."""
        m = 0.5 * (self.a + self.b)
        h2 = float(_dot(self.a - m, self.a - m))
        k2 = float(_dot(self.c - m, self.c - m))
        if k2 == 0.0:
            return None
        center = m - (self.c - m) * (h2 / k2)
        return center, float(_norm(self.a - center))

    def __call__(self, u):
        return eval_arc(self, u)


def eval_arc(seg: ArcSegment, u):
    """Point(s) on the arc at Bezier parameter ``u`` in [0, 1]."""
    u = np.asarray(u, dtype=float)
    pts = _eval(seg.a, seg.b, seg.c, np.float64(seg.omega), u[..., None])
    return pts


def _eval(a, b, c, omega, u):
    # u broadcasts against the trailing xyz axis, omega against the batch axes
    s = 1.0 - u
    w = 2.0 * u * s * omega[..., None] if np.ndim(omega) else 2.0 * u * s * omega
    num = s * s * a + w * c + u * u * b
    den = s * s + w + u * u
    return num / den


def propagate_control_point(a_next, b_next, c_prev, index: int = 0) -> np.ndarray:
    """Control point of the next segment that keeps the joint at ``a_next`` G1.

    Intersects the tangent ray ``a_next + t * unit(a_next - c_prev)`` with the
    bisector plane of ``a_next b_next``.
    """
    a, b, cp = as_vec3(a_next), as_vec3(b_next), as_vec3(c_prev)
    if np.array_equal(a, cp):
        raise ValueError("incoming tangent undefined: c_prev equals a_next")
    return _control_from_tangent(a, b, unit(a - cp), index)


def _control_from_tangent(a, b, t_hat, index=0):
    chord = b - a
    chord2 = float(_dot(chord, chord))
    if chord2 == 0.0:
        raise DegenerateSegment(index)
    proj = float(_dot(t_hat, chord))
    if proj <= _PARALLEL_TOL * np.sqrt(chord2):
        raise SemicircularDegenerate(index)
    return a + (0.5 * chord2 / proj) * t_hat


def arc_length(seg: ArcSegment) -> float:
    """Analytic arc length: chord times half-angle over its sine."""
    return float(_arc_lengths(seg.a, seg.b, seg.c))


def _arc_lengths(a, b, c):
    m = 0.5 * (a + b)
    h = _norm(a - m)
    k = _norm(c - m)
    phi = np.arctan2(k, h)  # half of the subtended angle
    return 2.0 * h / np.sinc(phi / np.pi)


# ---------------------------------------------------------------------------
# splines
# ---------------------------------------------------------------------------

def control_points(start, base_orientation, pts):
    """Batched control-point recursion.

    Args:
        start: (3,) base point.
        base_orientation: (3,) unit tangent at the base.
        pts: (..., n, 3) path points.

    Returns:
        ``(a, c, omega, bad)`` with shapes (..., n, 3), (..., n, 3), (..., n)
        and (..., n).  ``bad`` flags segments that are degenerate (coincident
        ends or a bend of pi or more); their controls are filled with the chord
        midpoint so downstream arithmetic stays finite.
    """
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[-2]
    batch = pts.shape[:-2]
    a = np.empty_like(pts)
    a[..., 0, :] = start
    a[..., 1:, :] = pts[..., :-1, :]
    c = np.empty_like(pts)
    omega = np.empty(batch + (n,))
    bad = np.zeros(batch + (n,), dtype=bool)
    t_hat = np.broadcast_to(np.asarray(base_orientation, dtype=float), batch + (3,))
    for j in range(n):
        aj = a[..., j, :]
        bj = pts[..., j, :]
        chord = bj - aj
        chord2 = _dot(chord, chord)
        proj = _dot(t_hat, chord)
        ok = proj > _PARALLEL_TOL * np.sqrt(chord2)
        ok &= chord2 > 0.0
        m = 0.5 * (aj + bj)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(ok, 0.5 * chord2 / np.where(ok, proj, 1.0), 0.0)
        cj = np.where(ok[..., None], aj + t[..., None] * t_hat, m)
        c[..., j, :] = cj
        h = 0.5 * np.sqrt(chord2)
        k = _norm(cj - m)
        with np.errstate(divide="ignore", invalid="ignore"):
            omega[..., j] = np.where(ok, h / np.sqrt(h * h + k * k), 1.0)
        bad[..., j] = ~ok
        out = bj - cj
        out_norm = _norm(out)
        safe = out_norm > 0.0
        t_hat = np.where(
            safe[..., None], out / np.where(safe, out_norm, 1.0)[..., None], t_hat
        )
    return a, c, omega, bad


def end_tangents(b, c):
    return unit(b - c)


def eval_arcs(a, b, c, omega, u):
    """Sample every segment at parameters ``u``: returns (..., n, len(u), 3)."""
    u = np.asarray(u, dtype=float)[:, None]
    return _eval(a[..., None, :], b[..., None, :], c[..., None, :], omega[..., None], u)


@dataclass(frozen=True, eq=False)
class ArcSpline:
    """A chain of G1-joined arcs starting at ``start`` along ``base_orientation``."""

    start: np.ndarray
    base_orientation: np.ndarray
    points: np.ndarray
    controls: np.ndarray
    omega: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def starts(self) -> np.ndarray:
        return np.vstack([self.start[None, :], self.points[:-1]])

    @property
    def segments(self) -> list[ArcSegment]:
        a = self.starts
        return [
            ArcSegment(a[i], self.points[i], self.controls[i], self.omega[i])
            for i in range(self.n)
        ]

    @property
    def lengths(self) -> np.ndarray:
        return _arc_lengths(self.starts, self.points, self.controls)

    @property
    def end_point(self) -> np.ndarray:
        return self.points[-1]

    @property
    def end_tangent(self) -> np.ndarray:
        return unit(self.points[-1] - self.controls[-1])

    def start_tangents(self) -> np.ndarray:
        return unit(self.controls - self.starts)

    def end_tangents(self) -> np.ndarray:
        return unit(self.points - self.controls)

    def joint_angles(self) -> np.ndarray:
        """Angles between consecutive tangents, base orientation first."""
        incoming = np.vstack([self.base_orientation[None, :], self.end_tangents()[:-1]])
        outgoing = self.start_tangents()
        cross = np.linalg.norm(np.cross(incoming, outgoing), axis=-1)
        return np.arctan2(cross, np.sum(incoming * outgoing, axis=-1))


def build_spline(start, base_orientation, pts) -> ArcSpline:
    """Construct the G1 arc spline through ``pts``.

    Raises:
        SemicircularDegenerate: a segment would bend by pi or more; ``index``
            names the first offending segment.
        DegenerateSegment: consecutive points coincide.
    """
    start = as_vec3(start)
    v = as_vec3(base_orientation)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError("base orientation must be a unit vector")
    pts = np.array(pts, dtype=float).reshape(-1, 3)
    if pts.shape[0] < 1 or not np.all(np.isfinite(pts)):
        raise ValueError("need at least one finite path point")
    a, c, omega, bad = control_points(start, v, pts)
    if bad.any():
        j = int(np.argmax(bad))
        if np.array_equal(a[j], pts[j]):
            raise DegenerateSegment(j)
        raise SemicircularDegenerate(j)
    pts.setflags(write=False)
    c.setflags(write=False)
    omega.setflags(write=False)
    return ArcSpline(start, v, pts, c, omega)


def extract_endpoints(spline: ArcSpline) -> np.ndarray:
    return np.array(spline.points)


def sample_body(spline: ArcSpline, samples_per_segment: int) -> np.ndarray:
    """Points uniformly spaced in ``u`` on every segment, joints not repeated.

    Returns an array of ``n * (samples_per_segment - 1) + 1`` points.
    """
    if samples_per_segment < 2:
        raise ValueError("samples_per_segment must be >= 2")
    u = np.linspace(0.0, 1.0, samples_per_segment)
    samples = eval_arcs(spline.starts, spline.points, spline.controls, spline.omega, u)
    body = samples[:, 1:, :].reshape(-1, 3)
    return np.vstack([spline.start[None, :], body])


def initial_guess(start, base_orientation, goal, n: int, strict: bool = False) -> np.ndarray:
    """Equal-arc-length points on the single arc from ``start`` to ``goal``.

    The arc leaves ``start`` tangent to ``base_orientation``.  When the goal
    sits exactly on the backward ray the connecting circle is undefined; with
    ``strict`` this raises :class:`GoalBehindDegenerate`, otherwise the goal
    direction is tilted by 1e-6 rad to pick one of the tangent circles.  The
    last returned point is always ``goal`` itself.
    """
    start, v, goal = as_vec3(start), unit(as_vec3(base_orientation)), as_vec3(goal)
    if n < 1:
        raise ValueError("n must be >= 1")
    d = goal - start
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise DegenerateSegment(0, "goal coincides with start")
    along = float(d @ v)
    perp = d - along * v
    perp_norm = float(np.linalg.norm(perp))
    if perp_norm <= 1e-12 * dist:
        if along > 0:
            pts = start + (np.arange(1, n + 1)[:, None] / n) * d
            pts[-1] = goal
            return pts
        if strict:
            raise GoalBehindDegenerate("goal lies on the backward base-orientation ray")
        axis = np.cross(v, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-6:
            axis = np.cross(v, [0.0, 1.0, 0.0])
        axis = unit(axis)
        tilt = 1e-6
        d = dist * (np.cos(tilt) * unit(d) + np.sin(tilt) * axis)
        along = float(d @ v)
        perp = d - along * v
        perp_norm = float(np.linalg.norm(perp))
    normal = perp / perp_norm
    radius = dist * dist / (2.0 * perp_norm)
    sweep = 2.0 * np.arctan2(perp_norm, along)
    theta = sweep * np.arange(1, n + 1) / n
    pts = start + radius * (
        np.sin(theta)[:, None] * v + (1.0 - np.cos(theta))[:, None] * normal
    )
    pts[-1] = goal
    return pts
