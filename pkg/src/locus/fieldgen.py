"""Machine-readable level-set and gradient-field grids, plus the
single-sensor level-radius law.

CSV columns: ``x,y[,z],value`` for objective grids and
``x,y[,z],gx,gy[,gz],singular`` for gradient grids.  Values are rendered
with 17 significant digits so golden files reproduce bit-for-bit.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (
    DISTANCE,
    SQUARED,
    Scenario,
    SingularPointError,
    eval_gradient,
    eval_objective,
)
from .oracle import GridSpec, grid_points


def objective_field(scenario: Scenario, grid: GridSpec) -> np.ndarray:
    """Row-major table of (coords..., objective value)."""
    pts = grid_points(grid)
    vals = eval_objective(pts, scenario)
    return np.column_stack([pts, vals])


def gradient_field(scenario: Scenario, grid: GridSpec) -> np.ndarray:
    """Row-major table of (coords..., gradient..., singular flag).

    Nodes on the singular set carry flag 1 and zero gradient columns.
    """
    pts = grid_points(grid)
    dim = scenario.dim
    out = np.zeros((pts.shape[0], 2 * dim + 1))
    out[:, :dim] = pts
    for i, p in enumerate(pts):
        try:
            out[i, dim:2 * dim] = eval_gradient(p, scenario)
        except SingularPointError:
            out[i, 2 * dim] = 1.0
    return out


def _format_row(row) -> str:
    return ",".join(f"{v:.17g}" for v in row)


def write_objective_csv(path: str, scenario: Scenario, grid: GridSpec) -> None:
    table = objective_field(scenario, grid)
    header = ("x,y,value" if scenario.dim == 2 else "x,y,z,value")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in table:
            fh.write(_format_row(row) + "\n")


def write_gradient_csv(path: str, scenario: Scenario, grid: GridSpec) -> None:
    table = gradient_field(scenario, grid)
    header = ("x,y,gx,gy,singular" if scenario.dim == 2
              else "x,y,z,gx,gy,gz,singular")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in table:
            fh.write(_format_row(row) + "\n")


def level_radii(d1: float, model: str, levels) -> list[dict]:
    """Inner/outer level-set radii for a single sensor of range d1.

    Identity transform: radii d1 +/- c (inner exists while c < d1).
    Square transform: sqrt(d1^2 +/- c) (inner exists while c < d1^2).
    """
    if d1 <= 0:
        raise ValueError("d1 must be positive")
    out = []
    for c in levels:
        c = float(c)
        if c < 0:
            raise ValueError("levels must be nonnegative")
        if model == DISTANCE:
            inner = d1 - c if c < d1 else None
            outer = d1 + c
        elif model == SQUARED:
            inner = math.sqrt(d1 * d1 - c) if c < d1 * d1 else None
            outer = math.sqrt(d1 * d1 + c)
        else:
            raise ValueError(f"unknown model {model!r}")
        out.append({"level": c, "inner": inner, "outer": outer})
    return out
