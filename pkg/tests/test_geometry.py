import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from arcik.geometry import (
    ArcSegment,
    DegenerateSegment,
    GoalBehindDegenerate,
    SemicircularDegenerate,
    arc_length,
    build_spline,
    eval_arc,
    extract_endpoints,
    initial_guess,
    propagate_control_point,
    sample_body,
    unit,
    weight_from_points,
)

from conftest import chains, random_chain, random_unit

R2 = math.sqrt(2.0) / 2.0
QUARTER = ArcSegment.from_points((1, 0, 0), (0, 1, 0), (1, 1, 0))


def random_segment(rng, max_half_angle=math.pi / 2 - 1e-3, phi=None):
    """Arc with random chord and a control point at a random height on the bisector plane.

    ``phi`` (half the subtended angle) is drawn uniformly unless given.
    """
    a = rng.uniform(-100, 100, size=3)
    b = a + rng.uniform(1, 100) * random_unit(rng)
    m = 0.5 * (a + b)
    h = np.linalg.norm(b - a) / 2
    chord = unit(b - a)
    normal = unit(np.cross(chord, random_unit(rng)))
    if phi is None:
        phi = rng.uniform(1e-4, max_half_angle)
    return ArcSegment.from_points(a, b, m + h * math.tan(phi) * normal)


def speed(seg, u):
    """|dy/du| from the quotient rule on the rational form."""
    a, b, c, w = seg.a, seg.b, seg.c, seg.omega
    s = 1 - u
    num = s * s * a + 2 * u * s * w * c + u * u * b
    den = s * s + 2 * u * s * w + u * u
    dnum = -2 * s * a + 2 * w * (1 - 2 * u) * c + 2 * u * b
    dden = -2 * s + 2 * w * (1 - 2 * u) + 2 * u
    return np.linalg.norm((dnum * den - num * dden) / den**2)


def quadrature_length(seg):
    return quad(lambda u: speed(seg, u), 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)[0]


# eval_arc / weight_from_points


def test_quarter_circle_weight():
    assert abs(weight_from_points((1, 0, 0), (0, 1, 0), (1, 1, 0)) - R2) < 1e-12


def test_quarter_circle_midpoint():
    np.testing.assert_allclose(eval_arc(QUARTER, 0.5), [R2, R2, 0.0], atol=1e-15)


def test_quarter_circle_sweep_on_unit_circle():
    u = np.linspace(0, 1, 101)
    r = np.linalg.norm(eval_arc(QUARTER, u), axis=1)
    np.testing.assert_allclose(r, 1.0, rtol=1e-14)


def test_straight_segment_is_linear():
    a, b = np.array([0.0, 0, 0]), np.array([3.0, 1, -2])
    seg = ArcSegment.from_points(a, b, (a + b) / 2)
    assert seg.omega == 1.0 and seg.is_straight
    for u in np.linspace(0, 1, 11):
        np.testing.assert_allclose(eval_arc(seg, u), a + u * (b - a), atol=1e-14)


def test_weight_when_height_equals_half_chord():
    # h = 1, k = 1
    assert weight_from_points((-1, 0, 0), (1, 0, 0), (0, 1, 0)) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_weight_coincident_points():
    with pytest.raises(DegenerateSegment):
        weight_from_points((1, 2, 3), (1, 2, 3), (0, 0, 0))


def test_segment_rejects_off_plane_control():
    with pytest.raises(ValueError):
        ArcSegment((0, 0, 0), (2, 0, 0), (1.5, 1, 0), 0.7)


def test_segment_rejects_inconsistent_weight():
    with pytest.raises(ValueError):
        ArcSegment((1, 0, 0), (0, 1, 0), (1, 1, 0), 0.5)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_endpoint_interpolation_exact(seed):
    seg = random_segment(np.random.default_rng(seed))
    assert np.array_equal(eval_arc(seg, 0.0), seg.a)
    assert np.array_equal(eval_arc(seg, 1.0), seg.b)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_circularity(seed):
    seg = random_segment(np.random.default_rng(seed), max_half_angle=math.pi / 2 - 1e-2)
    center, radius = seg.center_radius()
    r = np.linalg.norm(eval_arc(seg, np.linspace(0, 1, 33)) - center, axis=1)
    np.testing.assert_allclose(r, radius, rtol=1e-9)


# propagate_control_point


def test_propagate_example():
    # incoming tangent (1, 0, 0) at a = origin
    c = propagate_control_point((0, 0, 0), (1, 1, 0), (-1, 0, 0))
    np.testing.assert_allclose(c, [1, 0, 0], atol=1e-15)


def test_propagate_collinear_gives_midpoint():
    c = propagate_control_point((0, 0, 0), (4, 0, 0), (-2, 0, 0))
    np.testing.assert_allclose(c, [2, 0, 0])
    assert weight_from_points((0, 0, 0), (4, 0, 0), c) == 1.0


def test_propagate_perpendicular_raises():
    with pytest.raises(SemicircularDegenerate):
        propagate_control_point((0, 0, 0), (2, 0, 0), (0, -1, 0))


def test_propagate_keeps_tangent_and_plane(rng):
    for _ in range(100):
        start, v, pts = random_chain(rng, 2)
        c_prev = build_spline(start, v, pts[:1]).controls[0]
        c = propagate_control_point(pts[0], pts[1], c_prev)
        m = (pts[0] + pts[1]) / 2
        chord = pts[1] - pts[0]
        assert abs((c - m) @ chord) < 1e-9 * (chord @ chord)
        assert np.linalg.norm(np.cross(unit(c - pts[0]), unit(pts[0] - c_prev))) < 1e-12


# build_spline


def test_build_single_quarter_arc():
    sp = build_spline((0, 0, 0), (0, 1, 0), [(1, 1, 0)])
    np.testing.assert_allclose(sp.controls[0], [0, 1, 0], atol=1e-15)
    assert sp.omega[0] == pytest.approx(R2, abs=1e-15)


def test_build_collinear_straight():
    pts = [(0, 0, -10 * i) for i in range(1, 6)]
    sp = build_spline((0, 0, 0), (0, 0, -1), pts)
    assert np.all(sp.omega == 1.0)
    np.testing.assert_allclose(sp.lengths, 10.0)


def test_build_reports_semicircular_index():
    with pytest.raises(SemicircularDegenerate) as exc:
        build_spline((0, 0, 0), (0, 0, 1), [(0, 0, 5), (0, 0, 10), (5, 0, 10)])
    assert exc.value.index == 2


def test_build_coincident_points():
    with pytest.raises(DegenerateSegment):
        build_spline((0, 0, 0), (0, 0, 1), [(0, 0, 5), (0, 0, 5)])


def test_spline_is_immutable():
    sp = build_spline((0, 0, 0), (0, 1, 0), [(1, 1, 0)])
    with pytest.raises(ValueError):
        sp.points[0, 0] = 3.0


@settings(max_examples=300, deadline=None)
@given(chains())
def test_g1_joints(chain):
    start, v, pts = chain
    sp = build_spline(start, v, pts)
    assert np.max(sp.joint_angles()) < 1e-9
    assert np.array_equal(sp.starts[1:], sp.points[:-1])


@settings(max_examples=100, deadline=None)
@given(chains())
def test_round_trip(chain):
    start, v, pts = chain
    sp = build_spline(start, v, pts)
    again = build_spline(start, v, extract_endpoints(sp))
    assert np.array_equal(extract_endpoints(again), pts)
    assert np.array_equal(again.controls, sp.controls)
    assert np.array_equal(again.omega, sp.omega)


# arc_length


def test_quarter_circle_length():
    assert arc_length(QUARTER) == pytest.approx(math.pi / 2, rel=1e-15)


def test_straight_length():
    assert arc_length(ArcSegment.from_points((0, 0, 0), (3, 0, 0), (1.5, 0, 0))) == 3.0


def test_near_semicircle_length_finite():
    seg = random_segment(np.random.default_rng(3), phi=math.pi / 2 - 1e-4)
    assert seg.omega < 1e-3
    L = arc_length(seg)
    assert np.isfinite(L)
    assert abs(L - quadrature_length(seg)) <= 1e-6 * L


def test_length_matches_quadrature_1000(rng):
    worst = 0.0
    for _ in range(1000):
        seg = random_segment(rng)
        L = arc_length(seg)
        assert L >= np.linalg.norm(seg.b - seg.a)
        worst = max(worst, abs(L - quadrature_length(seg)) / L)
    assert worst < 1e-6


# sample_body


def test_two_samples_are_path_points():
    sp = build_spline((0, 0, 0), (0, 1, 0), [(1, 1, 0), (2, 2, 0)])
    body = sample_body(sp, 2)
    np.testing.assert_array_equal(body, [[0, 0, 0], [1, 1, 0], [2, 2, 0]])


def test_three_samples_quarter_midpoint():
    sp = build_spline((1, 0, 0), (0, 1, 0), [(0, 1, 0)])
    body = sample_body(sp, 3)
    np.testing.assert_allclose(body[1], [R2, R2, 0], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(chains(), st.integers(2, 12))
def test_sample_count_and_containment(chain, s):
    start, v, pts = chain
    sp = build_spline(start, v, pts)
    body = sample_body(sp, s)
    assert len(body) == sp.n * (s - 1) + 1
    for j, seg in enumerate(sp.segments):
        chunk = body[j * (s - 1): (j + 1) * (s - 1) + 1]
        cr = seg.center_radius()
        if cr is None:
            continue
        center, radius = cr
        assert np.all(np.linalg.norm(chunk - center, axis=1) <= radius * (1 + 1e-9))


def test_sample_body_needs_two():
    sp = build_spline((0, 0, 0), (0, 1, 0), [(1, 1, 0)])
    with pytest.raises(ValueError):
        sample_body(sp, 1)


# initial_guess


def test_initial_guess_on_ray():
    pts = initial_guess((0, 0, 0), (0, 0, 1), (0, 0, 12), 4)
    np.testing.assert_allclose(pts, [[0, 0, 3], [0, 0, 6], [0, 0, 9], [0, 0, 12]])


def test_initial_guess_half_circle_example():
    pts = initial_guess((0, 0, 0), (0, 1, 0), (2, 0, 0), 2)
    np.testing.assert_allclose(pts, [[1, 1, 0], [2, 0, 0]], atol=1e-15)


def test_initial_guess_single():
    goal = np.array([3.0, -4.0, 7.0])
    pts = initial_guess((0, 0, 0), (0, 0, 1), goal, 1)
    assert np.array_equal(pts[0], goal)


def test_initial_guess_behind():
    with pytest.raises(GoalBehindDegenerate):
        initial_guess((0, 0, 0), (0, 0, 1), (0, 0, -5), 3, strict=True)
    pts = initial_guess((0, 0, 0), (0, 0, 1), (0, 0, -5), 3)
    assert np.array_equal(pts[-1], [0, 0, -5])
    assert np.all(np.isfinite(pts))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_initial_guess_on_tangent_circle(seed, n):
    rng = np.random.default_rng(seed)
    start = rng.uniform(-50, 50, size=3)
    v = random_unit(rng)
    goal = start + rng.uniform(10, 300) * random_unit(rng)
    pts = initial_guess(start, v, goal, n)
    assert np.array_equal(pts[-1], goal)
    # a single tangent arc, so the spline is one circle with equal pieces
    d = goal - start
    perp = d - (d @ v) * v
    sweep = 2 * math.atan2(np.linalg.norm(perp), d @ v)
    if np.linalg.norm(perp) < 1e-6 * np.linalg.norm(d) or sweep / n > 0.95 * math.pi:
        return
    normal = unit(perp)
    radius = (d @ d) / (2 * np.linalg.norm(perp))
    center = start + radius * normal
    np.testing.assert_allclose(np.linalg.norm(pts - center, axis=1), radius, rtol=1e-9)
    sp = build_spline(start, v, pts)
    np.testing.assert_allclose(sp.lengths, sp.lengths.mean(), rtol=1e-9)
