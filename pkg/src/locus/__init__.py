"""Exact global-minimizer sets for range-based source localization.

Given one to three sensors with measured ranges, the library returns the
full set of global minimizers of the range-residual objective (absolute
distance error or squared-distance error) as explicit geometry: points,
segments, arcs, circles, or spheres.  A brute-force grid oracle certifies
every answer independently.
"""

from .analytic import solve, solve_one, solve_three_distance, solve_three_squared, solve_two
from .fieldgen import gradient_field, level_radii, objective_field
from .geom import (
    Arc,
    Ball,
    CirclePrimitive,
    CollinearError,
    DegenerateError,
    GeometryError,
    IntersectionSet,
    Segment,
    apex_arc,
    circle_circle_intersect,
    circumcircle,
    extremal_points,
    fermat_point,
    sphere_sphere_intersect,
    three_sphere_intersect,
)
from .model import (
    DISTANCE,
    SQUARED,
    Scenario,
    ScenarioError,
    Sensor,
    SingularPointError,
    SolutionSet,
    eval_gradient,
    eval_objective,
    scenario_from_json,
    scenario_to_json,
    solution_from_json,
)
from .oracle import (
    GridSpec,
    OracleSolution,
    VerificationReport,
    default_grid,
    grid_scan,
    polish,
    solve_oracle,
    verify,
)
from .regions import RegionCensus, classify_point, landmarks, region_census

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "Ball",
    "CirclePrimitive",
    "CollinearError",
    "DegenerateError",
    "DISTANCE",
    "GeometryError",
    "GridSpec",
    "IntersectionSet",
    "OracleSolution",
    "RegionCensus",
    "Scenario",
    "ScenarioError",
    "Segment",
    "Sensor",
    "SingularPointError",
    "SolutionSet",
    "SQUARED",
    "VerificationReport",
    "apex_arc",
    "circle_circle_intersect",
    "circumcircle",
    "classify_point",
    "default_grid",
    "eval_gradient",
    "eval_objective",
    "extremal_points",
    "fermat_point",
    "gradient_field",
    "grid_scan",
    "landmarks",
    "level_radii",
    "objective_field",
    "polish",
    "region_census",
    "scenario_from_json",
    "scenario_to_json",
    "solution_from_json",
    "solve",
    "solve_one",
    "solve_oracle",
    "solve_three_distance",
    "solve_three_squared",
    "solve_two",
    "sphere_sphere_intersect",
    "three_sphere_intersect",
    "verify",
]
