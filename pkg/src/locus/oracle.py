"""Brute-force global minimizer used to certify every analytic answer.

Pipeline: deterministic row-major grid scan, Lipschitz-based retention of
near-minimal nodes (no global minimum can hide between grid points),
derivative-free pattern-search polish of cluster representatives, then
clustering of the polished points into finite minima or continua with a
local-PCA dimension estimate.  Everything is deterministic for a fixed grid.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import Scenario, SolutionSet, eval_objective, objective_fn

RES_2D = 201
RES_3D = 81


@dataclass(frozen=True)
class OracleConfig:
    """Tunables for seeding, deduplication, and continuum detection."""

    dedup_radius: float = 1e-6
    cluster_cells: float = 3.0  # clustering radius in grid cells
    seed_factor: float = 2.0  # delta_seed = factor * cell diagonal * Lipschitz
    polish_floor: float = 1e-10
    budget_2d: int = 80  # polished representatives per cluster
    budget_3d: int = 150
    continuum_min_points: int = 8
    continuum_reps: int = 48


DEFAULT_CONFIG = OracleConfig()


@dataclass(frozen=True, eq=False)
class GridSpec:
    bounds: tuple[tuple[float, float], ...]
    resolution: int

    def __post_init__(self):
        if self.resolution < 3:
            raise ValueError("grid resolution must be at least 3")
        for lo, hi in self.bounds:
            if not lo < hi:
                raise ValueError(f"bad axis bounds [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, self.resolution) for lo, hi in self.bounds]

    def cell_sizes(self) -> np.ndarray:
        return np.array([(hi - lo) / (self.resolution - 1) for lo, hi in self.bounds])

    def cell_diagonal(self) -> float:
        return float(np.linalg.norm(self.cell_sizes()))


def default_grid(scenario: Scenario, resolution: int | None = None) -> GridSpec:
    """Axis-aligned box around all sensor centers, inflated by the largest
    measured range plus one unit."""
    centers = scenario.centers()
    pad = float(scenario.ranges().max()) + 1.0
    bounds = tuple(
        (float(centers[:, a].min()) - pad, float(centers[:, a].max()) + pad)
        for a in range(scenario.dim)
    )
    if resolution is None:
        resolution = RES_2D if scenario.dim == 2 else RES_3D
    return GridSpec(bounds=bounds, resolution=resolution)


def grid_points(grid: GridSpec) -> np.ndarray:
    """All grid nodes in row-major order (last axis fastest)."""
    mesh = np.meshgrid(*grid.axes(), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _workers() -> int:
    raw = os.environ.get("LOCUS_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def evaluate_grid(scenario: Scenario, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    pts = grid_points(grid)
    workers = _workers()
    if workers <= 1:
        return pts, eval_objective(pts, scenario)
    chunks = np.array_split(np.arange(pts.shape[0]), workers * 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda idx: eval_objective(pts[idx], scenario), chunks))
    return pts, np.concatenate(parts)


def lipschitz_bound(scenario: Scenario, grid: GridSpec) -> float:
    """Per-model bound on the objective's rate of change over the grid box."""
    if scenario.model == "distance":
        return float(scenario.count)
    total = 0.0
    for s in scenario.sensors:
        worst = math.sqrt(
            sum(
                max(abs(lo - z), abs(hi - z)) ** 2
                for (lo, hi), z in zip(grid.bounds, s.z)
            )
        )
        total += 2.0 * worst
    return total


def grid_scan(scenario: Scenario, grid: GridSpec,
              config: OracleConfig = DEFAULT_CONFIG):
    """Best grid value and all nodes within the Lipschitz retention bound."""
    pts, vals = evaluate_grid(scenario, grid)
    best = float(vals.min())
    delta = config.seed_factor * grid.cell_diagonal() * lipschitz_bound(scenario, grid)
    return best, pts[vals <= best + delta]


_STENCILS: dict[int, tuple] = {}


def _stencil(dim: int) -> tuple:
    """All nonzero sign vectors: axis and diagonal poll directions."""
    if dim not in _STENCILS:
        dirs = []
        for raw in np.ndindex(*([3] * dim)):
            d = tuple(float(v - 1) for v in raw)
            if any(d):
                dirs.append(d)
        _STENCILS[dim] = tuple(dirs)
    return _STENCILS[dim]


def _poll_directions(scenario: Scenario):
    """Poll set builder: fixed stencil plus sphere-aligned tangents.

    The objective's minima sit on measurement spheres and their pairwise
    intersection circles, where the descent cone is too narrow for a fixed
    stencil.  Tangent directions of each sphere at the current point (and,
    in 3D, the tangent of each pairwise intersection circle) restore
    convergence there.  Deterministic in the current point.
    """
    centers = [tuple(float(c) for c in s.z) for s in scenario.sensors]
    dim = scenario.dim
    base = _stencil(dim)
    sq2 = math.sqrt(0.5)

    def dirs(x):
        out = list(base)
        radials = []
        for z in centers:
            u = tuple(x[a] - z[a] for a in range(dim))
            r = math.sqrt(sum(c * c for c in u))
            if r <= 1e-12:
                continue
            u = tuple(c / r for c in u)
            radials.append(u)
            if dim == 2:
                t = (-u[1], u[0])
                out.append(t)
                out.append((-t[0], -t[1]))
            else:
                k = min(range(3), key=lambda a: abs(u[a]))
                seed = [0.0, 0.0, 0.0]
                seed[k] = 1.0
                v1 = _cross(seed, u)
                n1 = math.sqrt(sum(c * c for c in v1))
                v1 = tuple(c / n1 for c in v1)
                v2 = _cross(u, v1)
                for t in (
                    v1,
                    v2,
                    tuple(sq2 * (a + b) for a, b in zip(v1, v2)),
                    tuple(sq2 * (a - b) for a, b in zip(v1, v2)),
                ):
                    out.append(t)
                    out.append(tuple(-c for c in t))
        if dim == 3:
            for i in range(len(radials)):
                for j in range(i + 1, len(radials)):
                    c = _cross(radials[i], radials[j])
                    n = math.sqrt(sum(v * v for v in c))
                    if n > 1e-9:
                        t = tuple(v / n for v in c)
                        out.append(t)
                        out.append(tuple(-v for v in t))
        return out

    return dirs


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _pattern_search(f, x0, step0: float, floor: float, direction_fn,
                    max_evals: int = 120_000):
    """Poll descent, strictly non-increasing.

    Opportunistic polling with step expansion on success and halving on a
    full failed poll; directions are refreshed after each accepted move.
    """
    x = [float(c) for c in x0]
    dim = len(x)
    fx = f(*x)
    step = step0
    max_step = 8.0 * step0
    evals = 0
    dirs = direction_fn(x)
    while step > floor and evals < max_evals:
        best_f = fx
        best_x = None
        for d in dirs:
            cand = [x[a] + d[a] * step for a in range(dim)]
            fc = f(*cand)
            evals += 1
            if fc < best_f:
                best_f = fc
                best_x = cand
        if best_x is None:
            step *= 0.5
        else:
            x = best_x
            fx = best_f
            dirs = direction_fn(x)
            step = min(step * 2.0, max_step)
    return np.array(x), fx


def polish(scenario: Scenario, seeds, step0: float | None = None,
           config: OracleConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Pattern-search refinement of every seed, deduplicated."""
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    if seeds.size == 0:
        return np.empty((0, scenario.dim))
    if step0 is None:
        step0 = float(default_grid(scenario).cell_sizes().max())
    f = objective_fn(scenario)
    direction_fn = _poll_directions(scenario)
    refined = [_pattern_search(f, s, step0, config.polish_floor, direction_fn)
               for s in seeds]
    order = sorted(range(len(refined)),
                   key=lambda i: (refined[i][1], tuple(refined[i][0])))
    kept: list[np.ndarray] = []
    for i in order:
        p = refined[i][0]
        if all(float(np.linalg.norm(p - q)) > config.dedup_radius for q in kept):
            kept.append(p)
    kept.sort(key=tuple)
    return np.array(kept) if kept else np.empty((0, scenario.dim))


def _cluster_indices(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage components at cell granularity.

    Points are binned into cells of the given radius and cells touching
    (Chebyshev adjacency) are merged, so the effective linking distance is
    between one and ~2*sqrt(dim) radii.  Linear in the point count.
    """
    n = points.shape[0]
    if n == 0:
        return []
    inv = 1.0 / max(radius, 1e-300)
    keys = np.floor(points * inv).astype(np.int64)
    cells: dict[tuple, list[int]] = {}
    for i, key in enumerate(map(tuple, keys)):
        cells.setdefault(key, []).append(i)
    cell_ids = {key: idx for idx, key in enumerate(cells)}
    parent = list(range(len(cell_ids)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    dim = points.shape[1]
    offsets = [
        off
        for off in np.stack(
            np.meshgrid(*([[-1, 0, 1]] * dim), indexing="ij"), axis=-1
        ).reshape(-1, dim)
        if any(off)
    ]
    for key, cid in cell_ids.items():
        base = np.array(key)
        for off in offsets:
            other = cell_ids.get(tuple(base + off))
            if other is not None:
                union(cid, other)
    groups: dict[int, list[int]] = {}
    for key, members in cells.items():
        groups.setdefault(find(cell_ids[key]), []).extend(members)
    return [np.array(sorted(groups[k])) for k in sorted(groups)]


def _dedupe_rows(points: np.ndarray, radius: float) -> np.ndarray:
    kept: list[np.ndarray] = []
    for p in points:
        if all(float(np.linalg.norm(p - q)) > radius for q in kept):
            kept.append(p)
    return np.array(kept) if kept else points[:0]


def _local_dimension(points: np.ndarray) -> int:
    """Manifold dimension estimate from local principal spreads."""
    n = points.shape[0]
    if n < 4:
        return 1
    diff = points[:, None, :] - points[None, :, :]
    dists = np.sqrt((diff**2).sum(axis=-1))
    np.fill_diagonal(dists, np.inf)
    nn = float(np.median(dists.min(axis=1)))
    radius = 2.5 * nn
    probes = np.linspace(0, n - 1, min(16, n)).astype(int)
    dims = []
    for i in probes:
        nb = points[dists[i] <= radius]
        nb = np.vstack([nb, points[i]])
        if nb.shape[0] < 4:
            continue
        centered = nb - nb.mean(axis=0)
        svals = np.linalg.svd(centered, compute_uv=False)
        if svals[0] <= 0:
            continue
        dims.append(int((svals / svals[0] > 0.3).sum()))
    if not dims:
        return 1
    return int(min(2, max(1, round(float(np.median(dims))))))


@dataclass(frozen=True, eq=False)
class Continuum:
    dimension: int
    samples: np.ndarray


@dataclass(frozen=True, eq=False)
class OracleSolution:
    min_value: float
    minima: np.ndarray  # (k, dim); representatives along any continuum
    continuum: Continuum | None
    evidence: int  # count of near-minimal grid nodes
    grid_cell: float = 0.0

    def to_json(self) -> dict:
        cont = None
        if self.continuum is not None:
            cont = {
                "dimension": self.continuum.dimension,
                "samples": self.continuum.samples.tolist(),
            }
        return {
            "min_value": self.min_value,
            "minima": self.minima.tolist(),
            "continuum": cont,
            "evidence": self.evidence,
        }


def _group_with_connectivity(keep: np.ndarray, samples: np.ndarray,
                             radius: float) -> list[np.ndarray]:
    """Cluster kept minima, using dense near-minimal samples as connective
    tissue so sparse points along one continuum land in one group."""
    if samples.shape[0] == 0:
        return _cluster_indices(keep, radius)
    combined = np.vstack([keep, samples])
    groups = []
    nk = keep.shape[0]
    for idx in _cluster_indices(combined, radius):
        own = idx[idx < nk]
        if own.size:
            groups.append(own)
    return groups


def characterize(scenario: Scenario, minima: np.ndarray, samples: np.ndarray,
                 cell: float, config: OracleConfig = DEFAULT_CONFIG) -> OracleSolution:
    """Cluster polished minima into finite points or continua."""
    f = objective_fn(scenario)
    if minima.shape[0] == 0:
        raise ValueError("characterize needs at least one polished minimum")
    vals = np.array([f(*p) for p in minima])
    min_value = float(vals.min())
    keep_tol = 1e-8 * max(1.0, abs(min_value))
    keep = minima[vals <= min_value + keep_tol]
    out_minima: list[np.ndarray] = []
    cont_samples: list[np.ndarray] = []
    cont_dims: list[int] = []
    for idx in _group_with_connectivity(keep, np.asarray(samples, dtype=float),
                                        config.cluster_cells * cell):
        pts = keep[idx]
        distinct = _dedupe_rows(pts, config.dedup_radius)
        extent = 0.0
        if distinct.shape[0] > 1:
            box = distinct.max(axis=0) - distinct.min(axis=0)
            extent = float(np.linalg.norm(box))
        if (distinct.shape[0] >= config.continuum_min_points
                and extent > max(2.0 * cell, 10.0 * config.dedup_radius)):
            cont_dims.append(_local_dimension(distinct))
            stride = max(1, distinct.shape[0] // config.continuum_reps)
            reps = distinct[::stride]
            out_minima.extend(reps)
            cont_samples.extend(reps)
        else:
            out_minima.extend(distinct)
    continuum = None
    if cont_dims:
        continuum = Continuum(
            dimension=int(np.median(cont_dims)),
            samples=np.array(cont_samples),
        )
    return OracleSolution(
        min_value=min_value,
        minima=np.array(out_minima),
        continuum=continuum,
        evidence=int(samples.shape[0]),
        grid_cell=cell,
    )


def solve_oracle(scenario: Scenario, grid: GridSpec | None = None,
                 config: OracleConfig = DEFAULT_CONFIG) -> OracleSolution:
    """Full pipeline: scan, retain, polish representatives, characterize."""
    if grid is None:
        grid = default_grid(scenario)
    pts, vals = evaluate_grid(scenario, grid)
    best = float(vals.min())
    cell = float(grid.cell_sizes().max())
    diag = grid.cell_diagonal()
    lip = lipschitz_bound(scenario, grid)
    # every argmin point has a node within half a cell diagonal, whose value
    # is at most min + lip * diag/2; this slice provably meets every basin
    near_idx = np.flatnonzero(vals <= best + 0.5 * lip * diag)
    evidence = int(near_idx.size)
    # cap the retained node count; the lowest values hug the argmin set
    cap = 24_000
    if near_idx.size > cap:
        near_vals_all = vals[near_idx]
        near_idx = near_idx[np.argsort(near_vals_all, kind="stable")[:cap]]
        near_idx.sort()
    near_pts = pts[near_idx]
    near_vals = vals[near_idx]
    budget = config.budget_3d if scenario.dim == 3 else config.budget_2d
    reps: list[np.ndarray] = []
    for cl in _cluster_indices(near_pts, config.cluster_cells * cell):
        subvals = near_vals[cl]
        chosen = set(np.argsort(subvals, kind="stable")[:8].tolist())
        if cl.size > 1:
            stride = max(1, cl.size // budget)
            chosen.update(range(0, cl.size, stride))
        reps.extend(near_pts[cl[i]] for i in sorted(chosen))
    minima = polish(scenario, np.array(reps), step0=cell, config=config)
    sol = characterize(scenario, minima, near_pts, cell, config=config)
    return OracleSolution(
        min_value=sol.min_value,
        minima=sol.minima,
        continuum=sol.continuum,
        evidence=evidence,
        grid_cell=sol.grid_cell,
    )


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True, eq=False)
class VerificationReport:
    status: str  # PASS, FAIL, or ORACLE-ONLY
    checks: tuple  # (name, ok, detail)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_text(self) -> str:
        lines = []
        for name, ok, detail in self.checks:
            lines.append(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
        lines.append(f"verdict: {self.status}")
        return "\n".join(lines)


def _piece_extent(piece) -> float:
    pts = piece.sample(64)
    if pts.shape[0] < 2:
        return 0.0
    box = pts.max(axis=0) - pts.min(axis=0)
    return float(np.linalg.norm(box))


def verify(analytic: SolutionSet, oracle_sol: OracleSolution,
           scenario: Scenario, tol: float = 1e-5) -> VerificationReport:
    """Certify an analytic solution set against the brute-force oracle.

    PASS requires matching minimum values, every oracle minimum close to the
    analytic set, every analytic sample attaining the minimum, and matching
    cardinality class.  Unresolved analytic answers yield ORACLE-ONLY.
    """
    if not analytic.resolved:
        return VerificationReport(
            status="ORACLE-ONLY",
            checks=(("analytic-unresolved", True,
                     f"case {analytic.case}: oracle candidates only"),),
        )
    checks = []
    ref = max(1.0, abs(min(analytic.min_value, oracle_sol.min_value)))
    value_tol = 1e-6 * ref
    vdiff = abs(analytic.min_value - oracle_sol.min_value)
    checks.append(("min-value", vdiff <= value_tol,
                   f"analytic {analytic.min_value:.12g} vs oracle "
                   f"{oracle_sol.min_value:.12g} (diff {vdiff:.3g})"))

    worst_cover = 0.0
    for p in oracle_sol.minima:
        worst_cover = max(worst_cover, analytic.distance_to(p))
    checks.append(("oracle-minima-covered", worst_cover <= tol,
                   f"worst oracle-to-analytic distance {worst_cover:.3g}"))

    attain_tol = max(value_tol, 1e-8 * ref)
    worst_attain = 0.0
    for piece in analytic.pieces:
        ovals = eval_objective(piece.sample(64), scenario)
        worst_attain = max(worst_attain,
                           float(np.max(np.abs(ovals - oracle_sol.min_value))))
    checks.append(("analytic-pieces-attain-min", worst_attain <= attain_tol,
                   f"worst sample deviation {worst_attain:.3g}"))

    cell = max(oracle_sol.grid_cell, 1e-12)
    if not analytic.is_finite:
        if oracle_sol.continuum is not None:
            checks.append(("cardinality-class", True, "both continuum"))
        else:
            extent = max((_piece_extent(p) for p in analytic.pieces), default=0.0)
            ok = extent < 8.0 * cell
            detail = ("continuum below grid resolution "
                      f"(extent {extent:.3g} < 8 cells)" if ok else
                      f"analytic continuum (extent {extent:.3g}) not seen by oracle")
            checks.append(("cardinality-class", ok, detail))
    else:
        if oracle_sol.continuum is not None:
            checks.append(("cardinality-class", False,
                           "oracle found a continuum but analytic set is finite"))
        else:
            apts = np.vstack([p.sample(1) for p in analytic.pieces])
            expected = len(_cluster_indices(apts, 3.0 * cell))
            got = len(_cluster_indices(oracle_sol.minima, 3.0 * cell))
            checks.append(("cardinality-class", expected == got,
                           f"finite: {got} oracle clusters vs {expected} expected"))

    status = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
    return VerificationReport(status=status, checks=tuple(checks))
