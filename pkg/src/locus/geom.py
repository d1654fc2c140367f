"""Geometric primitives for range-sphere arrangements.

Vectors are plain numpy arrays of length 2 or 3.  All operations are pure
functions.  A single epsilon governs every tangency/degeneracy decision so
that downstream case dispatch is deterministic; residuals are normalized by
the squared scale of the configuration before comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EPS_GEO = 1e-9
"""Absolute tolerance on normalized residuals for tangency and degeneracy."""

WEISZFELD_STEP_TOL = 1e-12
WEISZFELD_MAX_ITER = 100_000

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Base class for geometric failures."""


class DimensionError(GeometryError):
    pass


class CollinearError(GeometryError):
    pass


class DegenerateError(GeometryError):
    pass


def as_point(p) -> np.ndarray:
    q = np.asarray(p, dtype=float)
    if q.ndim != 1 or q.shape[0] not in (2, 3):
        raise DimensionError(f"expected a 2- or 3-vector, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise GeometryError(f"non-finite coordinates: {q!r}")
    return q


def scale_tol(*magnitudes: float) -> float:
    """Epsilon scaled to the largest magnitude involved (at least 1)."""
    m = 1.0
    for v in magnitudes:
        a = abs(float(v))
        if a > m:
            m = a
    return EPS_GEO * m


def unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n <= EPS_GEO * max(1.0, float(np.max(np.abs(v), initial=0.0))):
        raise DegenerateError("cannot normalize a near-zero vector")
    return v / n


def plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic right-handed in-plane frame (u, v) for a unit normal.

    The seed axis is the standard basis vector of the normal's smallest
    absolute component, so the frame is reproducible across runs.
    """
    n = unit(as_point(normal))
    k = int(np.argmin(np.abs(n)))
    seed = np.zeros(3)
    seed[k] = 1.0
    u = unit(np.cross(seed, n))
    v = np.cross(n, u)
    return u, v


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball (disk in 2D): all points within `radius` of `center`."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius < 0:
            raise GeometryError(f"negative radius {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, p, slack: float = 0.0) -> bool:
        d = float(np.linalg.norm(as_point(p) - self.center))
        return d <= self.radius + slack + scale_tol(self.radius, d)

    def boundary_residual(self, p) -> float:
        """Normalized residual of the sphere equation at p."""
        d2 = float(np.dot(as_point(p) - self.center, as_point(p) - self.center))
        return abs(d2 - self.radius**2) / max(1.0, self.radius**2)


@dataclass(frozen=True, eq=False)
class CirclePrimitive:
    """Circle of positive radius; `normal` is a unit 3-vector, None in 2D."""

    center: np.ndarray
    radius: float
    normal: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise GeometryError(f"circle radius must be positive, got {self.radius}")
        if self.center.shape[0] == 3:
            if self.normal is None:
                raise GeometryError("3D circle requires a normal")
            object.__setattr__(self, "normal", unit(as_point(self.normal)))
        elif self.normal is not None:
            raise GeometryError("2D circle must not carry a normal")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dim == 2:
            return np.array([1.0, 0.0]), np.array([0.0, 1.0])
        return plane_basis(self.normal)

    def point_at(self, angle: float) -> np.ndarray:
        u, v = self.frame()
        return self.center + self.radius * (math.cos(angle) * u + math.sin(angle) * v)

    def angle_of(self, p) -> float:
        """Angle of p's in-plane projection, in this circle's own frame."""
        u, v = self.frame()
        w = as_point(p) - self.center
        return math.atan2(float(np.dot(w, v)), float(np.dot(w, u)))

    def distance_to(self, p) -> float:
        w = as_point(p) - self.center
        if self.dim == 2:
            return abs(float(np.linalg.norm(w)) - self.radius)
        axial = float(np.dot(w, self.normal))
        inplane = w - axial * self.normal
        return math.hypot(float(np.linalg.norm(inplane)) - self.radius, axial)


@dataclass(frozen=True, eq=False)
class Arc:
    """Circular arc from `start` to `end` angles in the circle's own frame."""

    circle: CirclePrimitive
    start: float
    end: float

    def __post_init__(self):
        span = self.end - self.start
        if span < -EPS_GEO or span > TWO_PI + EPS_GEO:
            raise GeometryError(f"arc span {span} outside [0, 2*pi]")

    @property
    def span(self) -> float:
        return self.end - self.start

    def point_at(self, t: float) -> np.ndarray:
        """Point at fraction t in [0, 1] along the arc."""
        return self.circle.point_at(self.start + t * self.span)

    def sample(self, n: int) -> np.ndarray:
        ts = np.linspace(0.0, 1.0, n)
        return np.array([self.point_at(t) for t in ts])

    def contains_angle(self, angle: float, slack: float = 1e-12) -> bool:
        rel = (angle - self.start) % TWO_PI
        return rel <= self.span + slack or rel >= TWO_PI - slack

    def distance_to(self, p) -> float:
        ang = self.circle.angle_of(p)
        if self.contains_angle(ang):
            return self.circle.distance_to(p)
        q = as_point(p)
        return min(
            float(np.linalg.norm(q - self.point_at(0.0))),
            float(np.linalg.norm(q - self.point_at(1.0))),
        )


@dataclass(frozen=True, eq=False)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_point(self.a))
        object.__setattr__(self, "b", as_point(self.b))

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))

    def point_at(self, t: float) -> np.ndarray:
        return self.a + t * (self.b - self.a)

    def sample(self, n: int) -> np.ndarray:
        ts = np.linspace(0.0, 1.0, n)
        return self.a[None, :] + ts[:, None] * (self.b - self.a)[None, :]

    def distance_to(self, p) -> float:
        q = as_point(p)
        d = self.b - self.a
        den = float(np.dot(d, d))
        t = 0.0 if den == 0.0 else float(np.clip(np.dot(q - self.a, d) / den, 0.0, 1.0))
        return float(np.linalg.norm(q - (self.a + t * d)))


# IntersectionSet kinds
EMPTY = "empty"
POINT = "point"
PAIR = "pair"
CIRCLE = "circle"
COINCIDENT = "coincident"


@dataclass(frozen=True, eq=False)
class IntersectionSet:
    kind: str
    points: tuple = field(default_factory=tuple)
    circle: CirclePrimitive | None = None

    def __post_init__(self):
        if self.kind not in (EMPTY, POINT, PAIR, CIRCLE, COINCIDENT):
            raise GeometryError(f"unknown intersection kind {self.kind!r}")

    @property
    def is_empty(self) -> bool:
        return self.kind in (EMPTY, COINCIDENT)


def _require_dim(expected: int, *balls: Ball):
    for b in balls:
        if b.dim != expected:
            raise DimensionError(f"expected dimension {expected}, got {b.dim}")


def circle_circle_intersect(c1: Ball, c2: Ball) -> IntersectionSet:
    """Intersection of two circles in the plane.

    Returns two points, one point (tangency within epsilon), empty, or
    `coincident` for two copies of the same circle.
    """
    _require_dim(2, c1, c2)
    delta = c2.center - c1.center
    d = float(np.linalg.norm(delta))
    tol = scale_tol(c1.radius, c2.radius, d)
    if d <= tol:
        if abs(c1.radius - c2.radius) <= tol:
            return IntersectionSet(COINCIDENT)
        return IntersectionSet(EMPTY)
    a = (d * d + c1.radius**2 - c2.radius**2) / (2.0 * d)
    h2 = c1.radius**2 - a * a
    h2_tol = EPS_GEO * max(1.0, c1.radius**2, c2.radius**2, d * d)
    u = delta / d
    foot = c1.center + a * u
    if abs(h2) <= h2_tol:
        return IntersectionSet(POINT, (foot,))
    if h2 < 0:
        return IntersectionSet(EMPTY)
    h = math.sqrt(h2)
    perp = np.array([-u[1], u[0]])
    return IntersectionSet(PAIR, (foot + h * perp, foot - h * perp))


def sphere_sphere_intersect(s1: Ball, s2: Ball) -> IntersectionSet:
    """Intersection of two spheres: a circle in the radical plane, a
    tangency point, empty, or coincident."""
    _require_dim(3, s1, s2)
    delta = s2.center - s1.center
    d = float(np.linalg.norm(delta))
    tol = scale_tol(s1.radius, s2.radius, d)
    if d <= tol:
        if abs(s1.radius - s2.radius) <= tol:
            return IntersectionSet(COINCIDENT)
        return IntersectionSet(EMPTY)
    a = (d * d + s1.radius**2 - s2.radius**2) / (2.0 * d)
    h2 = s1.radius**2 - a * a
    h2_tol = EPS_GEO * max(1.0, s1.radius**2, s2.radius**2, d * d)
    u = delta / d
    foot = s1.center + a * u
    if abs(h2) <= h2_tol:
        return IntersectionSet(POINT, (foot,))
    if h2 < 0:
        return IntersectionSet(EMPTY)
    return IntersectionSet(CIRCLE, (), CirclePrimitive(foot, math.sqrt(h2), u))


def _collinear(p1, p2, p3) -> bool:
    u = p2 - p1
    v = p3 - p1
    if p1.shape[0] == 2:
        cross = abs(u[0] * v[1] - u[1] * v[0])
    else:
        cross = float(np.linalg.norm(np.cross(u, v)))
    scale = max(1.0, float(np.dot(u, u)), float(np.dot(v, v)))
    return cross <= EPS_GEO * scale


def three_sphere_intersect(s1: Ball, s2: Ball, s3: Ball) -> IntersectionSet:
    """Common points of three spheres (or three circles in 2D).

    Centers must not be collinear.  In 2D the result is empty or a single
    point; in 3D it is empty, one point (tangency), or a symmetric pair.
    """
    if _collinear(s1.center, s2.center, s3.center):
        raise CollinearError("sphere centers are collinear")
    first = (
        circle_circle_intersect(s1, s2) if s1.dim == 2 else sphere_sphere_intersect(s1, s2)
    )
    if first.kind == COINCIDENT:
        raise DegenerateError("coincident spheres")
    if first.kind == EMPTY:
        return IntersectionSet(EMPTY)
    res_tol = EPS_GEO * max(1.0, s3.radius**2,
                            float(np.dot(s3.center, s3.center)))

    def on_third(p) -> bool:
        d2 = float(np.dot(p - s3.center, p - s3.center))
        return abs(d2 - s3.radius**2) <= res_tol * max(1.0, d2)

    if first.kind in (POINT, PAIR):
        hits = tuple(p for p in first.points if on_third(p))
        hits = _dedupe_points(hits)
        if not hits:
            return IntersectionSet(EMPTY)
        return IntersectionSet(POINT if len(hits) == 1 else PAIR, hits)

    # 3D: intersect the radical circle with the third sphere.
    circ = first.circle
    u, v = circ.frame()
    w = circ.center - s3.center
    a_coef = 2.0 * circ.radius * float(np.dot(u, w))
    b_coef = 2.0 * circ.radius * float(np.dot(v, w))
    c_coef = s3.radius**2 - float(np.dot(w, w)) - circ.radius**2
    amp = math.hypot(a_coef, b_coef)
    amp_tol = EPS_GEO * max(1.0, s3.radius**2, circ.radius**2, float(np.dot(w, w)))
    if amp <= amp_tol:
        # third center on the circle axis: with non-collinear centers this
        # cannot happen, but guard against numerical collapse
        raise DegenerateError("third sphere concentric with pair circle")
    ratio = c_coef / amp
    base = math.atan2(b_coef, a_coef)
    if abs(abs(ratio) - 1.0) <= amp_tol / max(amp, 1.0) or abs(ratio) in (1.0,):
        if abs(ratio) <= 1.0 + amp_tol:
            return IntersectionSet(POINT, (circ.point_at(base),))
    if abs(ratio) > 1.0:
        return IntersectionSet(EMPTY)
    off = math.acos(ratio)
    p1 = circ.point_at(base + off)
    p2 = circ.point_at(base - off)
    hits = _dedupe_points((p1, p2))
    return IntersectionSet(POINT if len(hits) == 1 else PAIR, hits)


def _dedupe_points(points, tol: float = 1e-9) -> tuple:
    out: list[np.ndarray] = []
    for p in points:
        if all(float(np.linalg.norm(p - q)) > tol * max(1.0, float(np.linalg.norm(q)))
               for q in out):
            out.append(p)
    return tuple(out)


def extremal_points(iset: IntersectionSet, ref) -> tuple[np.ndarray, np.ndarray]:
    """Closest and farthest member of a point pair or circle from `ref`.

    Raises DegenerateError when `ref` is equidistant from all members (pair
    tie, or ref on a circle's axis).
    """
    ref = as_point(ref)
    if iset.kind == PAIR:
        p, q = iset.points
        dp = float(np.linalg.norm(p - ref))
        dq = float(np.linalg.norm(q - ref))
        if abs(dp - dq) <= scale_tol(dp, dq):
            raise DegenerateError("reference equidistant from both points")
        return (p, q) if dp < dq else (q, p)
    if iset.kind == CIRCLE:
        circ = iset.circle
        w = ref - circ.center
        if circ.dim == 3:
            w = w - float(np.dot(w, circ.normal)) * circ.normal
        n = float(np.linalg.norm(w))
        if n <= scale_tol(circ.radius, *np.abs(ref)):
            raise DegenerateError("reference on the circle axis")
        dirn = w / n
        return circ.center + circ.radius * dirn, circ.center - circ.radius * dirn
    raise GeometryError(f"extremal points undefined for kind {iset.kind!r}")


def circumcircle(p1, p2, p3) -> CirclePrimitive:
    """Circle through three non-collinear points (works in 2D and 3D)."""
    p1, p2, p3 = as_point(p1), as_point(p2), as_point(p3)
    if _collinear(p1, p2, p3):
        raise CollinearError("circumcircle of collinear points")
    if p1.shape[0] == 2:
        ax, ay = p1
        bx, by = p2
        cx, cy = p3
        d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
              + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
              + (cx**2 + cy**2) * (bx - ax)) / d
        center = np.array([ux, uy])
        return CirclePrimitive(center, float(np.linalg.norm(p1 - center)))
    normal = unit(np.cross(p2 - p1, p3 - p1))
    u, v = plane_basis(normal)

    def to2d(p):
        w = p - p1
        return np.array([float(np.dot(w, u)), float(np.dot(w, v))])

    flat = circumcircle(to2d(p1), to2d(p2), to2d(p3))
    center3 = p1 + flat.center[0] * u + flat.center[1] * v
    return CirclePrimitive(center3, flat.radius, normal)


def fermat_point(p1, p2, p3) -> np.ndarray:
    """Point minimizing the total distance to three non-collinear points.

    Uses the closed-form vertex rule when an interior angle reaches 120
    degrees, otherwise Weiszfeld iteration started at the centroid.
    """
    pts = [as_point(p1), as_point(p2), as_point(p3)]
    if _collinear(*pts):
        raise CollinearError("vertices are collinear")
    for i in range(3):
        a, b, c = pts[i], pts[(i + 1) % 3], pts[(i + 2) % 3]
        ua, ub = unit(b - a), unit(c - a)
        if float(np.dot(ua, ub)) <= -0.5 + 1e-12:
            return a.copy()
    y = (pts[0] + pts[1] + pts[2]) / 3.0
    scale = max(float(np.linalg.norm(p - y)) for p in pts)
    for _ in range(WEISZFELD_MAX_ITER):
        dists = [float(np.linalg.norm(y - p)) for p in pts]
        if min(dists) < 1e-15 * max(1.0, scale):
            # sitting on a vertex despite the angle test: nudge off it
            y = y + 1e-9 * scale * unit(sum(pts) / 3.0 - y)
            continue
        wsum = sum(1.0 / d for d in dists)
        y_new = sum(p / d for p, d in zip(pts, dists)) / wsum
        step = float(np.linalg.norm(y_new - y))
        y = y_new
        if step < WEISZFELD_STEP_TOL * max(1.0, scale):
            break
    return y


def apex_arc(z1, z2, z3) -> tuple[np.ndarray, Arc]:
    """Equilateral apex over the far edge, and the opposite circumcircle arc.

    The apex sits over segment z2-z3 on z1's side of the line; the arc joins
    z2 and z3 along the circumcircle of the apex triangle on the other side.
    """
    z1, z2, z3 = as_point(z1), as_point(z2), as_point(z3)
    if _collinear(z1, z2, z3):
        raise CollinearError("vertices are collinear")
    mid = 0.5 * (z2 + z3)
    e = unit(z3 - z2)
    if z1.shape[0] == 2:
        perp = np.array([-e[1], e[0]])
    else:
        n = unit(np.cross(z2 - z1, z3 - z1))
        perp = np.cross(n, e)
    if float(np.dot(z1 - mid, perp)) < 0:
        perp = -perp
    side = float(np.linalg.norm(z3 - z2))
    apex = mid + (math.sqrt(3.0) / 2.0) * side * perp
    circ = circumcircle(apex, z2, z3)
    far_mid = circ.center - circ.radius * perp
    a2 = circ.angle_of(z2)
    a3 = circ.angle_of(z3)
    af = circ.angle_of(far_mid)
    span_23 = (a3 - a2) % TWO_PI
    if (af - a2) % TWO_PI <= span_23:
        arc = Arc(circ, a2, a2 + span_23)
    else:
        span_32 = (a2 - a3) % TWO_PI
        arc = Arc(circ, a3, a3 + span_32)
    return apex, arc


def line_circle_angles(origin, direction, circ: CirclePrimitive) -> list[float]:
    """Angles (in the circle's frame) where a line meets the circle.

    The line is given in the circle's plane; in 3D both the origin and
    direction must already lie in that plane.
    """
    u, v = circ.frame()
    o = as_point(origin) - circ.center
    d = np.asarray(direction, dtype=float)
    ox, oy = float(np.dot(o, u)), float(np.dot(o, v))
    dx, dy = float(np.dot(d, u)), float(np.dot(d, v))
    a = dx * dx + dy * dy
    if a <= EPS_GEO:
        raise DegenerateError("zero direction")
    b = 2.0 * (ox * dx + oy * dy)
    c = ox * ox + oy * oy - circ.radius**2
    disc = b * b - 4.0 * a * c
    tol = EPS_GEO * max(1.0, circ.radius**2) * a
    if disc < -tol:
        return []
    disc = max(disc, 0.0)
    roots = [(-b - math.sqrt(disc)) / (2.0 * a), (-b + math.sqrt(disc)) / (2.0 * a)]
    angles = []
    for t in roots:
        px, py = ox + t * dx, oy + t * dy
        angles.append(math.atan2(py, px))
    return angles


def segment_sphere_points(a, b, ball: Ball) -> list[np.ndarray]:
    """Points where the closed segment a-b meets the sphere boundary."""
    a, b = as_point(a), as_point(b)
    d = b - a
    w = a - ball.center
    qa = float(np.dot(d, d))
    if qa <= EPS_GEO:
        return []
    qb = 2.0 * float(np.dot(w, d))
    qc = float(np.dot(w, w)) - ball.radius**2
    disc = qb * qb - 4.0 * qa * qc
    tol = EPS_GEO * max(1.0, ball.radius**2) * qa
    if disc < -tol:
        return []
    disc = max(disc, 0.0)
    out = []
    for t in ((-qb - math.sqrt(disc)) / (2.0 * qa), (-qb + math.sqrt(disc)) / (2.0 * qa)):
        if -1e-12 <= t <= 1.0 + 1e-12:
            out.append(a + min(max(t, 0.0), 1.0) * d)
    return list(_dedupe_points(out))


def triangle_frame(z1, z2, z3):
    """Origin and orthonormal basis of the plane through three points.

    Returns (origin, u, v, normal) with normal None in 2D.  Used to run the
    planar case analysis inside the sensor plane in 3D.
    """
    z1, z2, z3 = as_point(z1), as_point(z2), as_point(z3)
    if _collinear(z1, z2, z3):
        raise CollinearError("triangle vertices are collinear")
    if z1.shape[0] == 2:
        return z1, np.array([1.0, 0.0]), np.array([0.0, 1.0]), None
    n = unit(np.cross(z2 - z1, z3 - z1))
    u = unit(z2 - z1)
    v = np.cross(n, u)
    return z1, u, v, n
