"""Census of the ball arrangement and the landmark points used by dispatch.

For three sensors the solver needs to know which parts of space are free of
which balls: whether the triple overlap is empty, whether each ball keeps a
region free of the other two (and whether that region is connected in 2D),
whether the sensor triangle has a pocket outside every ball, and where the
spheres touch the opposite triangle edges.  All of it reduces to planar
geometry inside the sensor plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .geom import (
    Ball,
    CIRCLE,
    DegenerateError,
    EPS_GEO,
    IntersectionSet,
    PAIR,
    POINT,
    Segment,
    TWO_PI,
    apex_arc,
    as_point,
    circle_circle_intersect,
    extremal_points,
    fermat_point,
    line_circle_angles,
    scale_tol,
    segment_sphere_points,
    sphere_sphere_intersect,
    triangle_frame,
    unit,
)
from .model import DISTANCE, SQUARED, Scenario, Sensor


# --- membership helpers (closed balls, epsilon slack) ----------------------


def in_ball(p, s: Sensor) -> bool:
    d = float(np.linalg.norm(as_point(p) - s.z))
    return d <= s.d + scale_tol(s.d, d)


def in_ball_interior(p, s: Sensor) -> bool:
    d = float(np.linalg.norm(as_point(p) - s.z))
    return d < s.d - scale_tol(s.d, d)


def in_complement_closure(p, s: Sensor) -> bool:
    d = float(np.linalg.norm(as_point(p) - s.z))
    return d >= s.d - scale_tol(s.d, d)


def in_region_closure(p, scenario: Scenario, inside_idx) -> bool:
    """Is p in the closure of the region inside exactly the given balls?"""
    inside = set(inside_idx)
    for i, s in enumerate(scenario.sensors):
        if i in inside:
            if not in_ball(p, s):
                return False
        elif not in_complement_closure(p, s):
            return False
    return True


def classify_point(W, scenario: Scenario) -> tuple[int, ...]:
    """Inside/outside bit per sensor ball (closed, epsilon slack)."""
    return tuple(1 if in_ball(W, s) else 0 for s in scenario.sensors)


# --- planar embedding -------------------------------------------------------


class PlaneFrame:
    """Maps between ambient coordinates and 2D coordinates in the sensor plane."""

    def __init__(self, z1, z2, z3):
        self.origin, self.u, self.v, self.normal = triangle_frame(z1, z2, z3)
        self.dim = as_point(z1).shape[0]

    def to2d(self, p) -> np.ndarray:
        w = as_point(p) - self.origin
        return np.array([float(np.dot(w, self.u)), float(np.dot(w, self.v))])

    def to3d(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return self.origin + q[0] * self.u + q[1] * self.v


# --- spherical cap bookkeeping ----------------------------------------------


def cap_halfwidth(center_i, d_i, center_j, d_j) -> float | None:
    """Angular half-width of the cap of sphere i covered by ball j.

    Returns None when ball j misses sphere i entirely, pi when it swallows
    it.  Valid in 2D (arcs) and 3D (caps) alike.
    """
    sep = float(np.linalg.norm(as_point(center_j) - as_point(center_i)))
    tol = scale_tol(d_i, d_j, sep)
    if d_i <= tol:
        # degenerate sphere: a single point
        return math.pi if sep <= d_j + tol else None
    if sep <= tol:
        return math.pi if d_i <= d_j + tol else None
    c = (d_i * d_i + sep * sep - d_j * d_j) / (2.0 * d_i * sep)
    if c > 1.0 + tol:
        return None
    if c < -1.0 + -tol:
        return math.pi
    return math.acos(min(1.0, max(-1.0, c)))


def _sphere_covered_by_two(ball_i: Ball, ball_j: Ball, ball_k: Ball) -> bool:
    """Is the whole sphere of ball_i inside the union of the two others?

    Equivalent to the ball itself being covered (a hole in the union would
    force an uncovered chord endpoint on the sphere).
    """
    wj = cap_halfwidth(ball_i.center, ball_i.radius, ball_j.center, ball_j.radius)
    wk = cap_halfwidth(ball_i.center, ball_i.radius, ball_k.center, ball_k.radius)
    if wj is not None and wj >= math.pi - 1e-15:
        return True
    if wk is not None and wk >= math.pi - 1e-15:
        return True
    if wj is None or wk is None:
        return False
    uj = ball_j.center - ball_i.center
    uk = ball_k.center - ball_i.center
    nj, nk = float(np.linalg.norm(uj)), float(np.linalg.norm(uk))
    if nj <= EPS_GEO or nk <= EPS_GEO:
        return False
    cosg = float(np.dot(uj, uk)) / (nj * nk)
    gamma = math.acos(min(1.0, max(-1.0, cosg)))
    return gamma >= TWO_PI - wj - wk - 1e-12


# --- triple overlap ----------------------------------------------------------


def _lens_distance(ball_a: Ball, ball_b: Ball, q) -> float | None:
    """Distance from q to the intersection of two balls; None if it is empty."""
    q = as_point(q)
    sep = float(np.linalg.norm(ball_b.center - ball_a.center))
    if sep > ball_a.radius + ball_b.radius + scale_tol(ball_a.radius, ball_b.radius, sep):
        return None
    if ball_a.contains(q) and ball_b.contains(q):
        return 0.0
    candidates = []
    for near, other in ((ball_a, ball_b), (ball_b, ball_a)):
        w = q - near.center
        n = float(np.linalg.norm(w))
        if n > EPS_GEO * max(1.0, near.radius):
            proj = near.center + near.radius * (w / n)
            if other.contains(proj):
                candidates.append(proj)
    corner = (
        circle_circle_intersect(ball_a, ball_b)
        if ball_a.dim == 2
        else sphere_sphere_intersect(ball_a, ball_b)
    )
    if corner.kind in (POINT, PAIR):
        candidates.extend(corner.points)
    elif corner.kind == CIRCLE:
        try:
            closest, _ = extremal_points(corner, q)
            candidates.append(closest)
        except DegenerateError:
            candidates.append(corner.circle.point_at(0.0))
    elif corner.kind == "coincident":
        candidates.append(ball_a.center + ball_a.radius * np.eye(ball_a.dim)[0])
    if not candidates:
        return None
    return min(float(np.linalg.norm(q - c)) for c in candidates)


def triple_overlap_empty(balls) -> bool:
    b1, b2, b3 = balls
    dist = _lens_distance(b1, b2, b3.center)
    if dist is None:
        return True
    return dist > b3.radius + scale_tol(b3.radius, dist)


# --- connectivity of the per-ball free region (2D) ---------------------------


def _solo_connected_2d(ball_i: Ball, ball_j: Ball, ball_k: Ball,
                       triple_empty: bool) -> bool:
    """Connectivity of ball i minus the two others, in the plane.

    The free region splits in two exactly when the two bites enter through
    disjoint boundary arcs and join up inside (nonempty triple overlap).
    """
    wj = cap_halfwidth(ball_i.center, ball_i.radius, ball_j.center, ball_j.radius)
    wk = cap_halfwidth(ball_i.center, ball_i.radius, ball_k.center, ball_k.radius)
    if wj is None or wk is None:
        return True
    if wj >= math.pi - 1e-15 or wk >= math.pi - 1e-15:
        return True
    uj = ball_j.center - ball_i.center
    uk = ball_k.center - ball_i.center
    pj = math.atan2(uj[1], uj[0])
    pk = math.atan2(uk[1], uk[0])
    circ_sep = abs((pj - pk + math.pi) % TWO_PI - math.pi)
    arcs_disjoint = circ_sep > wj + wk + 1e-12
    return not (arcs_disjoint and not triple_empty)


# --- edge contacts ------------------------------------------------------------


def edge_contacts(scenario: Scenario) -> tuple[np.ndarray, ...]:
    """Points where each sphere meets the opposite triangle edge on the free
    boundary (not interior to either of the other balls)."""
    sensors = scenario.sensors
    out: list[np.ndarray] = []
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        hits = segment_sphere_points(sensors[j].z, sensors[k].z, sensors[i].ball)
        for p in hits:
            if all(in_complement_closure(p, sensors[m]) for m in (j, k)):
                out.append(p)
    deduped: list[np.ndarray] = []
    for p in out:
        if all(float(np.linalg.norm(p - q)) > 1e-9 for q in deduped):
            deduped.append(p)
    return tuple(deduped)


# --- triangle pocket (certified subdivision) ----------------------------------

POCKET_YES = "yes"
POCKET_NO = "no"
POCKET_UNKNOWN = "unknown"


def pocket_status(scenario: Scenario, max_depth: int = 40,
                  max_nodes: int = 200_000) -> str:
    """Does the closed sensor triangle contain a point outside every ball?

    Certified adaptive subdivision: a sub-triangle is discarded only when all
    of its vertices sit strictly inside one common ball (convexity makes that
    a proof); a witness point decides 'yes'.  Returns 'unknown' on budget
    exhaustion.
    """
    sensors = scenario.sensors
    verts = [s.z for s in sensors]
    balls = [s.ball for s in sensors]

    def outside_all(p) -> bool:
        return all(in_complement_closure(p, s) for s in sensors)

    # quick witness scan on a coarse barycentric grid
    n = 12
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = n - a - b
            p = (a * verts[0] + b * verts[1] + c * verts[2]) / n
            if outside_all(p):
                return POCKET_YES

    def eliminated(tri) -> bool:
        for ball in balls:
            margin = 2.0 * scale_tol(ball.radius)
            if all(
                float(np.linalg.norm(v - ball.center)) <= ball.radius - margin
                for v in tri
            ):
                return True
        return False

    stack = [(verts[0], verts[1], verts[2], 0)]
    nodes = 0
    undecided = False
    while stack:
        a, b, c, depth = stack.pop()
        nodes += 1
        if eliminated((a, b, c)):
            continue
        for p in (a, b, c, (a + b + c) / 3.0):
            if outside_all(p):
                return POCKET_YES
        if depth >= max_depth or nodes >= max_nodes:
            undecided = True
            continue
        ab, bc, ca = (a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0
        stack.extend(
            [
                (a, ab, ca, depth + 1),
                (ab, b, bc, depth + 1),
                (ca, bc, c, depth + 1),
                (ab, bc, ca, depth + 1),
            ]
        )
    return POCKET_UNKNOWN if undecided else POCKET_NO


# --- census -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RegionCensus:
    """Emptiness/containment facts consumed by the three-sensor dispatch."""

    containments: np.ndarray  # [i, j] True when ball i lies inside ball j
    triple_overlap_empty: bool
    solo_nonempty: tuple[bool, bool, bool]  # ball i minus the two others
    solo_connected: tuple[bool, bool, bool] | None  # 2D only
    pocket: str  # yes/no/unknown: triangle points outside all balls
    contacts: tuple[np.ndarray, ...]


def region_census(scenario: Scenario) -> RegionCensus:
    if scenario.count != 3:
        raise ValueError("census requires exactly three sensors")
    sensors = scenario.sensors
    balls = [s.ball for s in sensors]
    # raises CollinearError for collinear centers
    PlaneFrame(sensors[0].z, sensors[1].z, sensors[2].z)

    contain = np.zeros((3, 3), dtype=bool)
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            sep = float(np.linalg.norm(balls[i].center - balls[j].center))
            contain[i, j] = sep + balls[i].radius <= balls[j].radius + scale_tol(
                balls[i].radius, balls[j].radius, sep
            )

    triple_empty = triple_overlap_empty(balls)
    solo = []
    connected = []
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        solo.append(not _sphere_covered_by_two(balls[i], balls[j], balls[k]))
        if scenario.dim == 2:
            connected.append(_solo_connected_2d(balls[i], balls[j], balls[k],
                                                triple_empty))
    return RegionCensus(
        containments=contain,
        triple_overlap_empty=triple_empty,
        solo_nonempty=tuple(solo),
        solo_connected=tuple(connected) if scenario.dim == 2 else None,
        pocket=pocket_status(scenario),
        contacts=edge_contacts(scenario),
    )


# --- landmark points -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Landmarks:
    """Model-dependent candidate points for the closed-form dispatch."""

    attractor: np.ndarray | Segment | None  # central point (or free gap segment)
    mirrors: tuple | None  # squared model: per-ball reflection points
    isoptics: tuple | None  # distance model: per-ball point/arc/None
    rims: tuple  # per-ball tuple of points on its sphere
    rim_far: tuple | None  # two-sensor case: far-side rim points
    corner_pairs: dict  # (i, j) -> tuple of sphere-pair points in the sensor plane


def _corner_pairs_in_plane(scenario: Scenario, frame: PlaneFrame) -> dict:
    """Pairwise sphere intersections restricted to the sensor plane."""
    out: dict = {}
    sensors = scenario.sensors
    for i in range(3):
        for j in range(i + 1, 3):
            c1 = Ball(frame.to2d(sensors[i].z), sensors[i].d)
            c2 = Ball(frame.to2d(sensors[j].z), sensors[j].d)
            hit = circle_circle_intersect(c1, c2)
            if hit.kind in (POINT, PAIR):
                out[(i, j)] = tuple(frame.to3d(p) for p in hit.points)
            else:
                out[(i, j)] = None
    return out


def _radial_rim(center, radius, toward) -> np.ndarray | None:
    w = as_point(toward) - as_point(center)
    n = float(np.linalg.norm(w))
    if n <= EPS_GEO * max(1.0, radius):
        return None
    return as_point(center) + radius * (w / n)


def sum_distance_rim(sensor: Sensor, za, zb, frame: PlaneFrame) -> tuple:
    """Points of the sensor's sphere minimizing total distance to za and zb.

    The minimizer lies in the sensor plane, so the search is a 1D scan over
    the in-plane circle angle with local refinement.  Two points are returned
    when two in-plane candidates tie to 1e-9.
    """
    if sensor.d <= 0.0:
        return (sensor.z.copy(),)
    c = frame.to2d(sensor.z)
    a2, b2 = frame.to2d(za), frame.to2d(zb)
    r = sensor.d

    def g(theta: float) -> float:
        p = c + r * np.array([math.cos(theta), math.sin(theta)])
        return float(np.linalg.norm(p - a2) + np.linalg.norm(p - b2))

    m = 720
    thetas = np.linspace(0.0, TWO_PI, m, endpoint=False)
    vals = np.array([g(t) for t in thetas])
    step = TWO_PI / m
    minima = []
    for idx in range(m):
        if vals[idx] <= vals[(idx - 1) % m] and vals[idx] <= vals[(idx + 1) % m]:
            res = minimize_scalar(
                g,
                bounds=(thetas[idx] - step, thetas[idx] + step),
                method="bounded",
                options={"xatol": 1e-13},
            )
            minima.append((float(res.fun), float(res.x)))
    if not minima:
        return (frame.to3d(c + r * np.array([1.0, 0.0])),)
    best = min(v for v, _ in minima)
    scale = max(1.0, abs(best))
    keep = []
    for v, t in sorted(minima):
        if v > best + 1e-9 * scale:
            continue
        p = c + r * np.array([math.cos(t), math.sin(t)])
        if all(float(np.linalg.norm(p - q)) > 1e-8 * max(1.0, r) for q in keep):
            keep.append(p)
    return tuple(frame.to3d(p) for p in keep[:2])


def _isoptic(scenario: Scenario, i: int, frame: PlaneFrame):
    """Distance-model landmark over ball i: the apex-line hit on the far arc,
    the whole arc for the equilateral vertex, or None."""
    sensors = scenario.sensors
    j, k = [m for m in range(3) if m != i]
    apex, arc = apex_arc(sensors[i].z, sensors[j].z, sensors[k].z)
    gap = float(np.linalg.norm(apex - sensors[i].z))
    side = float(np.linalg.norm(sensors[j].z - sensors[k].z))
    if gap <= 1e-9 * max(1.0, side):
        return arc
    direction = sensors[i].z - apex
    angles = line_circle_angles(apex, direction, arc.circle)
    apex_angle = arc.circle.angle_of(apex)
    for ang in angles:
        if abs((ang - apex_angle + math.pi) % TWO_PI - math.pi) <= 1e-7:
            continue
        if arc.contains_angle(ang, slack=1e-9):
            return arc.circle.point_at(ang)
    return None


def landmarks(scenario: Scenario) -> Landmarks:
    if scenario.count == 1:
        raise ValueError("landmarks need two or three sensors")
    sensors = scenario.sensors
    if scenario.count == 2:
        s1, s2 = sensors
        sep = float(np.linalg.norm(s2.z - s1.z))
        if sep <= scale_tol(s1.d, s2.d, sep):
            raise DegenerateError("coincident sensor centers")
        u = (s2.z - s1.z) / sep
        near1 = s1.z + s1.d * u
        near2 = s2.z - s2.d * u
        far1 = s1.z - s1.d * u
        far2 = s2.z + s2.d * u
        if scenario.model == SQUARED:
            attractor = 0.5 * (s1.z + s2.z)
        else:
            gap = sep - s1.d - s2.d
            if gap > scale_tol(sep):
                attractor = Segment(near1, near2)
            elif gap >= -scale_tol(sep):
                attractor = 0.5 * (near1 + near2)
            else:
                attractor = None
        return Landmarks(
            attractor=attractor,
            mirrors=None,
            isoptics=None,
            rims=((near1,), (near2,)),
            rim_far=((far1,), (far2,)),
            corner_pairs={},
        )

    frame = PlaneFrame(sensors[0].z, sensors[1].z, sensors[2].z)
    corner = _corner_pairs_in_plane(scenario, frame)
    if scenario.model == SQUARED:
        centroid = sum(s.z for s in sensors) / 3.0
        mirrors = tuple(
            sensors[j].z + sensors[k].z - sensors[i].z
            for i, (j, k) in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1)))
        )
        rims = []
        for i in range(3):
            p = _radial_rim(sensors[i].z, sensors[i].d, centroid)
            rims.append((p,) if p is not None else ())
        return Landmarks(
            attractor=centroid,
            mirrors=mirrors,
            isoptics=None,
            rims=tuple(rims),
            rim_far=None,
            corner_pairs=corner,
        )

    attractor = fermat_point(sensors[0].z, sensors[1].z, sensors[2].z)
    isoptics = tuple(_isoptic(scenario, i, frame) for i in range(3))
    rims = tuple(
        sum_distance_rim(sensors[i], *(sensors[m].z for m in range(3) if m != i), frame)
        for i in range(3)
    )
    return Landmarks(
        attractor=attractor,
        mirrors=None,
        isoptics=isoptics,
        rims=rims,
        rim_far=None,
        corner_pairs=corner,
    )


def cross_rim(scenario: Scenario, i: int, target) -> np.ndarray | None:
    """Radial projection of a target point onto sphere i."""
    s = scenario.sensors[i]
    return _radial_rim(s.z, s.d, target)
