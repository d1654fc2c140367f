import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from locus.geom import (
    Arc,
    Ball,
    CirclePrimitive,
    CollinearError,
    DegenerateError,
    IntersectionSet,
    apex_arc,
    circle_circle_intersect,
    circumcircle,
    extremal_points,
    fermat_point,
    segment_sphere_points,
    sphere_sphere_intersect,
    three_sphere_intersect,
)
from conftest import random_rotation

SQRT2 = math.sqrt(2.0)


def points_sorted(pts):
    return sorted(tuple(np.round(p, 9)) for p in pts)


def test_circle_circle_two_points():
    hit = circle_circle_intersect(Ball([0, 0], SQRT2), Ball([2, 0], SQRT2))
    assert hit.kind == "pair"
    assert points_sorted(hit.points) == [(1.0, -1.0), (1.0, 1.0)]


def test_circle_circle_tangent():
    hit = circle_circle_intersect(Ball([0, 0], 1.0), Ball([2, 0], 1.0))
    assert hit.kind == "point"
    assert_allclose(hit.points[0], [1.0, 0.0], atol=1e-12)


def test_circle_circle_disjoint_and_coincident():
    assert circle_circle_intersect(Ball([0, 0], 1.0), Ball([5, 0], 1.0)).kind == "empty"
    assert circle_circle_intersect(Ball([0, 0], 1.0), Ball([0, 0], 1.0)).kind == "coincident"
    assert circle_circle_intersect(Ball([0, 0], 1.0), Ball([0, 0], 2.0)).kind == "empty"


def test_sphere_sphere_circle():
    hit = sphere_sphere_intersect(Ball([0, 0, 0], SQRT2), Ball([2, 0, 0], SQRT2))
    assert hit.kind == "circle"
    circ = hit.circle
    assert_allclose(circ.center, [1, 0, 0], atol=1e-12)
    assert_allclose(circ.radius, 1.0, atol=1e-12)
    assert_allclose(np.abs(circ.normal), [1, 0, 0], atol=1e-12)


def test_sphere_sphere_tangent_and_concentric():
    hit = sphere_sphere_intersect(Ball([0, 0, 0], 1.0), Ball([2, 0, 0], 1.0))
    assert hit.kind == "point"
    assert_allclose(hit.points[0], [1, 0, 0], atol=1e-12)
    assert sphere_sphere_intersect(Ball([0, 0, 0], 1.0), Ball([0, 0, 0], 2.0)).kind == "empty"


def test_three_sphere_3d_pair():
    hit = three_sphere_intersect(
        Ball([0, 0, 0], SQRT2), Ball([2, 0, 0], SQRT2), Ball([1, 1, 0], SQRT2)
    )
    assert hit.kind == "pair"
    assert points_sorted(hit.points) == [(1.0, 0.0, -1.0), (1.0, 0.0, 1.0)]


def test_three_sphere_2d_empty_after_substitution():
    # the pair from the first two circles is (1, +-1); neither lies on the
    # third circle centered at (1, 1) with radius sqrt(2)
    hit = three_sphere_intersect(
        Ball([0, 0], SQRT2), Ball([2, 0], SQRT2), Ball([1, 1], SQRT2)
    )
    assert hit.kind == "empty"


def test_three_sphere_2d_single_point():
    hit = three_sphere_intersect(
        Ball([0, 0], SQRT2), Ball([2, 0], SQRT2), Ball([0, 2], SQRT2)
    )
    assert hit.kind == "point"
    assert_allclose(hit.points[0], [1, 1], atol=1e-9)


def test_three_sphere_collinear_rejected():
    with pytest.raises(CollinearError):
        three_sphere_intersect(Ball([0, 0], 1), Ball([1, 0], 1), Ball([2, 0], 1))


def test_intersection_residuals():
    balls = [Ball([0.3, -1.2], 2.1), Ball([1.7, 0.4], 1.3)]
    hit = circle_circle_intersect(*balls)
    for p in hit.points:
        for b in balls:
            assert b.boundary_residual(p) <= 1e-9
    s1, s2 = Ball([0.3, -1.2, 0.5], 2.1), Ball([1.7, 0.4, -0.2], 1.3)
    hit3 = sphere_sphere_intersect(s1, s2)
    assert hit3.kind == "circle"
    for ang in np.linspace(0, 2 * math.pi, 17):
        p = hit3.circle.point_at(ang)
        assert s1.boundary_residual(p) <= 1e-9
        assert s2.boundary_residual(p) <= 1e-9


def test_extremal_pair():
    iset = IntersectionSet("pair", (np.array([1.0, 1.0]), np.array([1.0, -1.0])))
    close, far = extremal_points(iset, [0, 0.5])
    assert_allclose(close, [1, 1])
    assert_allclose(far, [1, -1])


def test_extremal_circle_in_plane():
    circ = CirclePrimitive([1, 0, 0], 1.0, [1, 0, 0])
    iset = IntersectionSet("circle", (), circ)
    close, far = extremal_points(iset, [1, 5, 0])
    assert_allclose(close, [1, 1, 0], atol=1e-12)
    assert_allclose(far, [1, -1, 0], atol=1e-12)


def test_extremal_degenerate_axis():
    circ = CirclePrimitive([0, 0, 0], 1.0, [0, 0, 1])
    iset = IntersectionSet("circle", (), circ)
    with pytest.raises(DegenerateError):
        extremal_points(iset, [0, 0, 7])


def test_circumcircle_examples():
    c = circumcircle([0, 0], [2, 0], [1, 1])
    assert_allclose(c.center, [1, 0], atol=1e-12)
    assert_allclose(c.radius, 1.0, atol=1e-12)
    c2 = circumcircle([0, 0], [2, 0], [1, math.sqrt(3)])
    assert_allclose(c2.center, [1, 1 / math.sqrt(3)], atol=1e-12)
    assert_allclose(c2.radius, 2 / math.sqrt(3), atol=1e-12)
    with pytest.raises(CollinearError):
        circumcircle([0, 0], [1, 0], [2, 0])


def test_circumcircle_through_points_3d(rng):
    for _ in range(20):
        pts = rng.uniform(-2, 2, size=(3, 3))
        try:
            c = circumcircle(*pts)
        except CollinearError:
            continue
        for p in pts:
            assert abs(np.linalg.norm(p - c.center) - c.radius) <= 1e-9 * max(1, c.radius)


def _weiszfeld_reference(pts, iters=20000):
    # independent fixed-point iteration used as an oracle for fermat_point
    y = np.mean(pts, axis=0)
    for _ in range(iters):
        d = np.array([np.linalg.norm(y - p) for p in pts])
        if d.min() < 1e-14:
            break
        w = 1.0 / d
        y_new = (pts * w[:, None]).sum(axis=0) / w.sum()
        if np.linalg.norm(y_new - y) < 1e-15:
            y = y_new
            break
        y = y_new
    return y


def test_fermat_equilateral_centroid():
    f = fermat_point([0, 0], [2, 0], [1, math.sqrt(3)])
    assert_allclose(f, [1, 1 / math.sqrt(3)], atol=1e-9)


def test_fermat_obtuse_vertex_rule():
    # angle at (0,0) is wide; compare against the independent iteration
    pts = np.array([[0.0, 0.0], [4.0, 0.0], [0.1, 0.1]])
    f = fermat_point(*pts)
    ref = _weiszfeld_reference(pts)
    total = lambda q: sum(np.linalg.norm(q - p) for p in pts)
    assert total(f) <= total(ref) + 1e-10


def test_fermat_symmetry():
    f = fermat_point([0, 0], [4, 0], [0, 4])
    assert abs(f[0] - f[1]) <= 1e-9


def test_fermat_dominates_random_points(rng):
    pts = np.array([[0.0, 0.0], [3.0, 0.5], [1.0, 2.5]])
    f = fermat_point(*pts)
    best = sum(np.linalg.norm(f - p) for p in pts)
    qs = rng.uniform([-0.5, -0.5], [3.5, 3.0], size=(10_000, 2))
    totals = sum(np.linalg.norm(qs - p, axis=1) for p in pts)
    assert best <= totals.min() + 1e-8


def test_apex_arc_equilateral():
    z1, z2, z3 = [0, 0], [2, 0], [1, math.sqrt(3)]
    apex, arc = apex_arc(z1, z2, z3)
    assert_allclose(apex, z1, atol=1e-9)
    ends = points_sorted([arc.point_at(0.0), arc.point_at(1.0)])
    assert ends == points_sorted([z2, z3])
    # the far-arc identity: the distance to the apex vertex equals the sum of
    # the distances to the other two vertices
    for t in np.linspace(0, 1, 33):
        w = arc.point_at(t)
        lhs = np.linalg.norm(w - np.array(z1, float))
        rhs = np.linalg.norm(w - np.array(z2, float)) + np.linalg.norm(w - np.array(z3, float))
        assert abs(lhs - rhs) <= 1e-9


def test_apex_arc_general_triangle():
    z1, z2, z3 = np.array([0.0, 0.0]), np.array([2.0, 0.0]), np.array([1.0, 5.0])
    apex, arc = apex_arc(z1, z2, z3)
    # apex is on z1's side of the line through z2 and z3
    e = (z3 - z2) / np.linalg.norm(z3 - z2)
    n = np.array([-e[1], e[0]])
    side = np.sign(np.dot(z1 - z2, n))
    assert np.sign(np.dot(apex - z2, n)) == side
    ends = points_sorted([arc.point_at(0.0), arc.point_at(1.0)])
    assert ends == points_sorted([z2, z3])
    circ = arc.circle
    for t in np.linspace(0, 1, 21):
        w = arc.point_at(t)
        assert abs(np.linalg.norm(w - circ.center) - circ.radius) <= 1e-9
        # arc stays on the other side
        assert np.sign(np.dot(w - z2, n)) in (-side, 0.0)


def test_apex_line_hits_arc_at_most_once(rng):
    from locus.geom import line_circle_angles

    for _ in range(50):
        pts = rng.uniform(-3, 3, size=(3, 2))
        try:
            apex, arc = apex_arc(*pts)
        except CollinearError:
            continue
        if np.linalg.norm(apex - pts[0]) < 1e-9:
            continue
        angles = line_circle_angles(apex, pts[0] - apex, arc.circle)
        apex_ang = arc.circle.angle_of(apex)
        hits = [
            a for a in angles
            if abs((a - apex_ang + math.pi) % (2 * math.pi) - math.pi) > 1e-7
            and arc.contains_angle(a, slack=1e-9)
        ]
        assert len(hits) <= 1


def test_rigid_motion_equivariance(rng):
    for dim in (2, 3):
        for _ in range(10):
            rot = random_rotation(rng, dim)
            shift = rng.uniform(-2, 2, size=dim)
            move = lambda p: rot @ np.asarray(p, float) + shift
            c1 = rng.uniform(-1, 1, size=dim)
            c2 = c1 + rng.uniform(0.5, 1.5, size=dim)
            r1, r2 = 1.4, 1.1
            if dim == 2:
                hit = circle_circle_intersect(Ball(c1, r1), Ball(c2, r2))
                hit_t = circle_circle_intersect(Ball(move(c1), r1), Ball(move(c2), r2))
            else:
                hit = sphere_sphere_intersect(Ball(c1, r1), Ball(c2, r2))
                hit_t = sphere_sphere_intersect(Ball(move(c1), r1), Ball(move(c2), r2))
            assert hit.kind == hit_t.kind
            if hit.kind == "pair":
                got = points_sorted([move(p) for p in hit.points])
                want = points_sorted(hit_t.points)
                assert_allclose(got, want, atol=1e-9)
            elif hit.kind == "circle":
                assert_allclose(move(hit.circle.center), hit_t.circle.center, atol=1e-9)
                assert_allclose(hit.circle.radius, hit_t.circle.radius, atol=1e-9)


def test_segment_sphere_points():
    pts = segment_sphere_points([0, -2], [0, 2], Ball([0, 0], 1.0))
    assert points_sorted(pts) == [(0.0, -1.0), (0.0, 1.0)]
    assert segment_sphere_points([2, -2], [2, 2], Ball([0, 0], 1.0)) == []


def test_arc_invariant_span():
    circ = CirclePrimitive([0, 0], 1.0)
    with pytest.raises(Exception):
        Arc(circ, 0.0, 7.0)
