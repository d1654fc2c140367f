"""Closed-form argmin sets for one, two, and three range measurements.

Each solver follows the published case analysis for its sensor count:
containment and overlap facts pick a case, and the answer is assembled from
landmark points (midpoints/centroids, reflections, rim projections, sphere
pair corners, Fermat points, isoptic arcs).  Where a case reduces to "the
nearest admissible point to an attractor", the finite family of constrained
critical points is evaluated directly, which is exact and immune to labeling
ambiguities.  Configurations the theory leaves open come back with
``resolved=False`` and oracle-found candidates embedded.
"""

from __future__ import annotations

import math

import numpy as np

from . import oracle as oracle_mod
from .geom import (
    Arc,
    CIRCLE,
    CirclePrimitive,
    CollinearError,
    DegenerateError,
    PAIR,
    POINT,
    Segment,
    TWO_PI,
    scale_tol,
    three_sphere_intersect,
)
from .model import (
    DISTANCE,
    INFINITE,
    ArcPiece,
    CirclePiece,
    PointPiece,
    Scenario,
    SegmentPiece,
    SpherePiece,
    SQUARED,
    SolutionSet,
    eval_objective,
)
from .regions import (
    Landmarks,
    POCKET_NO,
    POCKET_UNKNOWN,
    POCKET_YES,
    RegionCensus,
    cap_halfwidth,
    cross_rim,
    in_region_closure,
    landmarks,
    region_census,
)

TIE_REL = 1e-8


def _dedupe(points, tol=1e-9):
    out = []
    for p in points:
        if all(float(np.linalg.norm(p - q)) > tol * max(1.0, float(np.linalg.norm(q)))
               for q in out):
            out.append(np.asarray(p, dtype=float))
    return out


def _point_pieces(points):
    return tuple(PointPiece(p) for p in _dedupe(points))


def _segment_piece(a, b):
    seg = Segment(a, b)
    if seg.length <= scale_tol(*np.abs(a), *np.abs(b)):
        return PointPiece(0.5 * (seg.a + seg.b)), 1.0
    return SegmentPiece(seg), INFINITE


def _finalize(scenario, case, pieces, cardinality, resolved=True, min_value=None):
    pieces = tuple(pieces)
    if min_value is None:
        reps = np.vstack([p.sample(5) for p in pieces])
        min_value = float(np.min(eval_objective(reps, scenario)))
    return SolutionSet(
        case=case,
        pieces=pieces,
        cardinality=float(cardinality) if math.isfinite(cardinality) else INFINITE,
        min_value=min_value,
        resolved=resolved,
    )


def _argmin_select(scenario, labeled):
    """Winner subset (by objective value) among labeled candidate points."""
    if not labeled:
        return [], math.inf
    seen: list[tuple[str, np.ndarray, float]] = []
    for label, pt in labeled:
        pt = np.asarray(pt, dtype=float)
        if any(float(np.linalg.norm(pt - q)) <= 1e-9 * max(1.0, float(np.linalg.norm(q)))
               for _, q, _ in seen):
            continue
        seen.append((label, pt, float(eval_objective(pt, scenario))))
    best = min(v for _, _, v in seen)
    tol = TIE_REL * max(1.0, abs(best))
    winners = [(label, pt) for label, pt, v in seen if v <= best + tol]
    return winners, best


def _oracle_fallback(scenario, case):
    sol = oracle_mod.solve_oracle(scenario)
    pieces = _point_pieces(sol.minima)
    card = INFINITE if sol.continuum is not None else float(len(pieces))
    return SolutionSet(
        case=case,
        pieces=pieces,
        cardinality=card,
        min_value=sol.min_value,
        resolved=False,
    )


# ---------------------------------------------------------------------------
# one measurement


def solve_one(scenario: Scenario) -> SolutionSet:
    if scenario.count != 1:
        raise ValueError("solve_one needs exactly one sensor")
    s = scenario.sensors[0]
    if s.d <= 0.0:
        return _finalize(scenario, "one.point", (PointPiece(s.z),), 1.0)
    if scenario.dim == 2:
        piece = CirclePiece(CirclePrimitive(s.z, s.d))
        return _finalize(scenario, "one.ring", (piece,), INFINITE)
    piece = SpherePiece(s.z, s.d)
    return _finalize(scenario, "one.shell", (piece,), INFINITE)


# ---------------------------------------------------------------------------
# two measurements


def solve_two(scenario: Scenario) -> SolutionSet:
    if scenario.count != 2:
        raise ValueError("solve_two needs exactly two sensors")
    swap = scenario.sensors[0].d < scenario.sensors[1].d
    a, b = (scenario.sensors[1], scenario.sensors[0]) if swap else scenario.sensors
    suffix = "|swap" if swap else ""
    sep = float(np.linalg.norm(b.z - a.z))
    tol = scale_tol(a.d, b.d, sep)

    if sep <= tol:
        if abs(a.d - b.d) <= tol:
            if a.d <= tol:
                return _finalize(scenario, "two.coincident.point" + suffix,
                                 (PointPiece(a.z),), 1.0)
            piece = (CirclePiece(CirclePrimitive(a.z, a.d)) if scenario.dim == 2
                     else SpherePiece(a.z, a.d))
            return _finalize(scenario, "two.coincident.ring" + suffix,
                             (piece,), INFINITE)
        # annulus of minimizers between the two radii: outside the theory
        return _oracle_fallback(scenario, "two.coincident.open" + suffix)

    u = (b.z - a.z) / sep
    near_a = a.z + a.d * u
    near_b = b.z - b.d * u
    far_b = b.z + b.d * u

    if scenario.model == SQUARED:
        if a.d <= sep / 2.0 + tol:
            mid = 0.5 * (a.z + b.z)
            return _finalize(scenario, "two.squared.midpoint" + suffix,
                             (PointPiece(mid),), 1.0)
        if a.d + b.d <= sep + tol:
            return _finalize(scenario, "two.squared.rim" + suffix,
                             (PointPiece(near_a),), 1.0)
        if sep - (a.d - b.d) > tol and (a.d + b.d) - sep > tol:
            return _crossing_solution(scenario, a, b, "two.squared.crossing" + suffix)
        return _finalize(scenario, "two.squared.rim-nested" + suffix,
                         (PointPiece(near_a),), 1.0)

    # distance model
    if a.d + b.d <= sep + tol:
        piece, card = _segment_piece(near_a, near_b)
        return _finalize(scenario, "two.distance.gap" + suffix, (piece,), card)
    if sep >= (a.d - b.d) - tol:
        return _crossing_solution(scenario, a, b, "two.distance.crossing" + suffix)
    piece, card = _segment_piece(far_b, near_a)
    return _finalize(scenario, "two.distance.nested" + suffix, (piece,), card)


def _crossing_solution(scenario, a, b, case):
    hit = three_sphere_pairwise(a, b, scenario.dim)
    if hit.kind == POINT:
        return _finalize(scenario, case, _point_pieces(hit.points), 1.0)
    if hit.kind == PAIR:
        pieces = _point_pieces(hit.points)
        return _finalize(scenario, case, pieces, float(len(pieces)))
    if hit.kind == CIRCLE:
        return _finalize(scenario, case, (CirclePiece(hit.circle),), INFINITE)
    raise DegenerateError(f"expected a sphere crossing for case {case}")


def three_sphere_pairwise(a, b, dim):
    from .geom import circle_circle_intersect, sphere_sphere_intersect

    return (circle_circle_intersect(a.ball, b.ball) if dim == 2
            else sphere_sphere_intersect(a.ball, b.ball))


# ---------------------------------------------------------------------------
# three measurements, squared model


def _confined_candidates(scenario, lm: Landmarks, hub: int):
    """Constrained-minimum candidates inside ball `hub`, outside the others."""
    attractor = lm.mirrors[hub]
    others = [m for m in range(3) if m != hub]
    region = {hub}
    cands = []
    if in_region_closure(attractor, scenario, region):
        cands.append((f"mirror|hub={hub + 1}", attractor))
    rim_self = cross_rim(scenario, hub, attractor)
    if rim_self is not None and in_region_closure(rim_self, scenario, region):
        cands.append((f"rim|hub={hub + 1}", rim_self))
    for m in others:
        rim_m = cross_rim(scenario, m, attractor)
        if rim_m is not None and in_region_closure(rim_m, scenario, region):
            cands.append((f"cross-rim|hub={hub + 1},sphere={m + 1}", rim_m))
    for (i, j), pts in lm.corner_pairs.items():
        if pts is None:
            continue
        for p in pts:
            if in_region_closure(p, scenario, region):
                cands.append((f"corner|hub={hub + 1},pair={i + 1}{j + 1}", p))
    return cands


def _outer_candidates_squared(scenario, lm: Landmarks):
    """Constrained-minimum candidates outside every ball."""
    cands = []
    att = lm.attractor
    if in_region_closure(att, scenario, set()):
        cands.append(("centroid", att))
    for i in range(3):
        for p in lm.rims[i]:
            if in_region_closure(p, scenario, set()):
                cands.append((f"rim|sphere={i + 1}", p))
    for (i, j), pts in lm.corner_pairs.items():
        if pts is None:
            continue
        for p in pts:
            if in_region_closure(p, scenario, set()):
                cands.append((f"corner|pair={i + 1}{j + 1}", p))
    return cands


def _sweep_candidates(scenario, lm: Landmarks):
    """Complete family of constrained critical points for the squared model.

    Interior attractors, all sphere-face critical points of every sign
    pattern of the restricted objective, and the in-plane sphere-pair
    corners.  The global argmin over this family equals the true argmin set,
    so the selection needs no region tests.
    """
    sensors = scenario.sensors
    cands = [("centroid", lm.attractor)]
    for i in range(3):
        cands.append((f"mirror|{i + 1}", lm.mirrors[i]))
    for i in range(3):
        zi, di = sensors[i].z, sensors[i].d
        if di <= 0:
            cands.append((f"center|{i + 1}", zi))
            continue
        others = [m for m in range(3) if m != i]
        for sj in (1.0, -1.0):
            for sk in (1.0, -1.0):
                v = sj * (sensors[others[0]].z - zi) + sk * (sensors[others[1]].z - zi)
                n = float(np.linalg.norm(v))
                if n <= 1e-12:
                    continue
                cands.append((f"face|{i + 1}", zi + di * v / n))
                cands.append((f"face|{i + 1}", zi - di * v / n))
    for (i, j), pts in lm.corner_pairs.items():
        if pts is None:
            continue
        for p in pts:
            cands.append((f"corner|{i + 1}{j + 1}", p))
    return cands


def solve_three_squared(scenario: Scenario) -> SolutionSet:
    if scenario.count != 3 or scenario.model != SQUARED:
        raise ValueError("solve_three_squared needs three sensors, squared model")
    census = region_census(scenario)
    lm = landmarks(scenario)
    sensors = scenario.sensors

    hit = three_sphere_intersect(*(s.ball for s in sensors))
    if hit.kind in (POINT, PAIR):
        pieces = _point_pieces(hit.points)
        return _finalize(scenario, "three.consistent", pieces, float(len(pieces)))

    contain = census.containments
    # one ball inside both others, whose spheres cross
    for k in range(3):
        i, j = [m for m in range(3) if m != k]
        if contain[k, i] and contain[k, j] and lm.corner_pairs[(i, j)]:
            labeled = [
                (f"corner|pair={i + 1}{j + 1},inner={k + 1}", p)
                for p in lm.corner_pairs[(i, j)]
            ]
            winners, _ = _argmin_select(scenario, labeled)
            return _finalize(
                scenario,
                "three.squared.inner-pair-corner|" + winners[0][0],
                _point_pieces([p for _, p in winners]),
                float(len(winners)),
            )

    # both other balls inside one hub ball
    for hub in range(3):
        others = [m for m in range(3) if m != hub]
        if all(contain[m, hub] for m in others):
            winners, _ = _argmin_select(scenario, _confined_candidates(scenario, lm, hub))
            if winners:
                return _finalize(
                    scenario,
                    "three.squared.confined." + winners[0][0],
                    _point_pieces([p for _, p in winners]),
                    float(len(winners)),
                )

    if census.pocket == POCKET_YES:
        winners, _ = _argmin_select(scenario, _outer_candidates_squared(scenario, lm))
        if winners:
            return _finalize(
                scenario,
                "three.squared.outer." + winners[0][0],
                _point_pieces([p for _, p in winners]),
                float(len(winners)),
            )

    if census.pocket == POCKET_NO and census.triple_overlap_empty:
        labeled = []
        for hub in range(3):
            others = [m for m in range(3) if m != hub]
            meets_both = all(
                float(np.linalg.norm(sensors[m].z - sensors[hub].z))
                <= sensors[m].d + sensors[hub].d
                + scale_tol(sensors[m].d, sensors[hub].d)
                for m in others
            )
            if meets_both:
                labeled.extend(_confined_candidates(scenario, lm, hub))
        winners, _ = _argmin_select(scenario, labeled)
        if winners:
            return _finalize(
                scenario,
                "three.squared.cover." + winners[0][0],
                _point_pieces([p for _, p in winners]),
                float(len(winners)),
            )

    if scenario.dim == 2 and not census.triple_overlap_empty:
        solo = census.solo_nonempty
        connected = census.solo_connected
        if all(solo) and all(connected):
            labeled = []
            for (i, j), pts in lm.corner_pairs.items():
                if pts is None:
                    continue
                labeled.extend((f"corner|pair={i + 1}{j + 1}", p) for p in pts)
            winners, _ = _argmin_select(scenario, labeled)
            if winners:
                return _finalize(
                    scenario,
                    "three.squared.residual.corners",
                    _point_pieces([p for _, p in winners]),
                    float(len(winners)),
                )
        split = [i for i in range(3) if solo[i] and not connected[i]]
        if split:
            labeled = []
            for hub in split:
                labeled.extend(_confined_candidates(scenario, lm, hub))
            for (i, j), pts in lm.corner_pairs.items():
                if pts is None:
                    continue
                labeled.extend((f"corner|pair={i + 1}{j + 1}", p) for p in pts)
            winners, _ = _argmin_select(scenario, labeled)
            if winners:
                return _finalize(
                    scenario,
                    "three.squared.residual.split." + winners[0][0],
                    _point_pieces([p for _, p in winners]),
                    float(len(winners)),
                )

    if census.pocket == POCKET_UNKNOWN:
        return _oracle_fallback(scenario, "three.squared.census-unknown")

    winners, _ = _argmin_select(scenario, _sweep_candidates(scenario, lm))
    return _finalize(
        scenario,
        "three.squared.sweep." + winners[0][0],
        _point_pieces([p for _, p in winners]),
        float(len(winners)),
    )


# ---------------------------------------------------------------------------
# three measurements, distance model


def _equilateral_side(sensors) -> float | None:
    d01 = float(np.linalg.norm(sensors[0].z - sensors[1].z))
    d12 = float(np.linalg.norm(sensors[1].z - sensors[2].z))
    d20 = float(np.linalg.norm(sensors[2].z - sensors[0].z))
    scale = max(d01, d12, d20)
    if abs(d01 - d12) <= 1e-9 * scale and abs(d12 - d20) <= 1e-9 * scale:
        return (d01 + d12 + d20) / 3.0
    return None


def _circular_window_clip(arc: Arc, win_center: float, win_half: float):
    """Sub-intervals of [0, span] (arc-relative) covered by the window."""
    span = arc.span
    a = (win_center - win_half - arc.start) % TWO_PI
    b = a + 2.0 * win_half
    out = []
    if a < span:
        out.append((a, min(b, span)))
    if b > TWO_PI:
        wrap = b - TWO_PI
        out.append((0.0, min(wrap, span)))
    return out


def _clip_arc_outside_balls(arc: Arc, balls) -> list[Arc]:
    """Portions of the arc lying outside every given ball."""
    forbidden = []
    circ = arc.circle
    u, v = circ.frame()
    for ball in balls:
        w = ball.center - circ.center
        ell = math.hypot(float(np.dot(w, u)), float(np.dot(w, v)))
        half = cap_halfwidth(circ.center, circ.radius, ball.center, ball.radius)
        if half is None:
            continue
        if half >= math.pi - 1e-15:
            return []
        center_ang = math.atan2(float(np.dot(w, v)), float(np.dot(w, u)))
        forbidden.extend(_circular_window_clip(arc, center_ang, half))
    allowed = [(0.0, arc.span)]
    for f0, f1 in forbidden:
        nxt = []
        for a0, a1 in allowed:
            lo, hi = max(a0, f0), min(a1, f1)
            if lo >= hi:
                nxt.append((a0, a1))
                continue
            if a0 < lo:
                nxt.append((a0, lo))
            if hi < a1:
                nxt.append((hi, a1))
        allowed = nxt
    return [
        Arc(circ, arc.start + a0, arc.start + a1)
        for a0, a1 in allowed
        if a1 - a0 > 1e-9
    ]


def solve_three_distance(scenario: Scenario) -> SolutionSet:
    if scenario.count != 3 or scenario.model != DISTANCE:
        raise ValueError("solve_three_distance needs three sensors, distance model")
    census = region_census(scenario)
    lm = landmarks(scenario)
    sensors = scenario.sensors

    hit = three_sphere_intersect(*(s.ball for s in sensors))
    if hit.kind in (POINT, PAIR):
        pieces = _point_pieces(hit.points)
        return _finalize(scenario, "three.consistent", pieces, float(len(pieces)))

    if in_region_closure(lm.attractor, scenario, set()):
        return _finalize(scenario, "three.distance.fermat",
                         (PointPiece(lm.attractor),), 1.0)

    side = _equilateral_side(sensors)
    iso_points = []
    for i in range(3):
        iso = lm.isoptics[i]
        if iso is None:
            continue
        if isinstance(iso, Arc):
            j, k = [m for m in range(3) if m != i]
            if side is not None and (
                (math.sqrt(3.0) / 2.0) * sensors[i].d > side > sensors[j].d + sensors[k].d
            ):
                sub = _clip_arc_outside_balls(iso, [sensors[j].ball, sensors[k].ball])
                if sub:
                    return _finalize(
                        scenario,
                        f"three.distance.isoptic-arc|hub={i + 1}",
                        tuple(ArcPiece(a) for a in sub),
                        INFINITE,
                    )
            continue
        if in_region_closure(iso, scenario, {i}):
            iso_points.append((f"isoptic|hub={i + 1}", iso))
    if iso_points:
        winners, _ = _argmin_select(scenario, iso_points)
        return _finalize(
            scenario,
            "three.distance." + winners[0][0],
            _point_pieces([p for _, p in winners]),
            float(len(winners)),
        )

    if census.contacts:
        labeled = [("edge-contact", p) for p in census.contacts]
        winners, _ = _argmin_select(scenario, labeled)
        return _finalize(
            scenario,
            "three.distance.edge-contact",
            _point_pieces([p for _, p in winners]),
            float(len(winners)),
        )

    if census.pocket == POCKET_YES:
        labeled = []
        for i in range(3):
            for p in lm.rims[i]:
                if in_region_closure(p, scenario, set()):
                    labeled.append((f"rim|sphere={i + 1}", p))
        for (i, j), pts in lm.corner_pairs.items():
            if pts is None:
                continue
            for p in pts:
                if in_region_closure(p, scenario, set()):
                    labeled.append((f"corner|pair={i + 1}{j + 1}", p))
        winners, _ = _argmin_select(scenario, labeled)
        if winners:
            return _finalize(
                scenario,
                "three.distance.outer." + winners[0][0],
                _point_pieces([p for _, p in winners]),
                float(len(winners)),
            )

    return _oracle_fallback(scenario, "three.distance.open")


# ---------------------------------------------------------------------------
# entry point


def solve(scenario: Scenario) -> SolutionSet:
    """Dispatch on sensor count and error model; always returns a solution
    set (possibly unresolved, with oracle-found candidates embedded)."""
    if scenario.count == 1:
        return solve_one(scenario)
    if scenario.count == 2:
        return solve_two(scenario)
    if scenario.model == SQUARED:
        return solve_three_squared(scenario)
    return solve_three_distance(scenario)
