"""Scenario data model, error models, objective and gradient evaluation.

The objective sums, over all sensors, the absolute mismatch between the
transformed distance to the candidate source and the transformed measured
range.  Two transforms are supported: identity ("distance") and square
("squared").
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .geom import (
    Arc,
    Ball,
    CirclePrimitive,
    EPS_GEO,
    Segment,
    as_point,
    scale_tol,
)

DISTANCE = "distance"
SQUARED = "squared"
MODELS = (DISTANCE, SQUARED)

INFINITE = math.inf


class ScenarioError(ValueError):
    """Malformed scenario (bad dimension, sensor count, or field values)."""


class SingularPointError(ValueError):
    """Gradient requested on a sphere boundary or at a sensor center."""


def psi(y, model: str):
    if model == DISTANCE:
        return y
    if model == SQUARED:
        return y * y
    raise ScenarioError(f"unknown error model {model!r}")


def psi_prime(y, model: str):
    if model == DISTANCE:
        return np.ones_like(np.asarray(y, dtype=float))
    if model == SQUARED:
        return 2.0 * y
    raise ScenarioError(f"unknown error model {model!r}")


@dataclass(frozen=True, eq=False)
class Sensor:
    z: np.ndarray
    d: float

    def __post_init__(self):
        object.__setattr__(self, "z", as_point(self.z))
        object.__setattr__(self, "d", float(self.d))
        if self.d < 0 or not math.isfinite(self.d):
            raise ScenarioError(f"measured range must be finite and >= 0, got {self.d}")

    @property
    def ball(self) -> Ball:
        return Ball(self.z, self.d)


@dataclass(frozen=True, eq=False)
class Scenario:
    dim: int
    model: str
    sensors: tuple[Sensor, ...]

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ScenarioError(f"dim must be 2 or 3, got {self.dim}")
        if self.model not in MODELS:
            raise ScenarioError(f"model must be one of {MODELS}, got {self.model!r}")
        sensors = tuple(self.sensors)
        if not 1 <= len(sensors) <= 3:
            raise ScenarioError(f"need 1 to 3 sensors, got {len(sensors)}")
        for s in sensors:
            if s.z.shape[0] != self.dim:
                raise ScenarioError(
                    f"sensor at {s.z.tolist()} has dimension {s.z.shape[0]}, expected {self.dim}"
                )
        object.__setattr__(self, "sensors", sensors)

    @property
    def count(self) -> int:
        return len(self.sensors)

    def centers(self) -> np.ndarray:
        return np.array([s.z for s in self.sensors])

    def ranges(self) -> np.ndarray:
        return np.array([s.d for s in self.sensors])


def eval_objective(W, scenario: Scenario):
    """Objective value at W; vectorized over leading axes of W."""
    pts = np.asarray(W, dtype=float)
    if pts.shape[-1] != scenario.dim:
        raise ScenarioError(
            f"point dimension {pts.shape[-1]} != scenario dimension {scenario.dim}"
        )
    total = np.zeros(pts.shape[:-1])
    for s in scenario.sensors:
        r = np.linalg.norm(pts - s.z, axis=-1)
        total = total + np.abs(psi(r, scenario.model) - psi(s.d, scenario.model))
    if total.shape == ():
        return float(total)
    return total


def objective_fn(scenario: Scenario):
    """Fast scalar objective for tight polish loops (plain Python floats)."""
    data = [(tuple(float(c) for c in s.z), psi(s.d, scenario.model))
            for s in scenario.sensors]
    squared = scenario.model == SQUARED
    if scenario.dim == 2:
        def f2(x: float, y: float) -> float:
            total = 0.0
            for (zx, zy), target in data:
                dx = x - zx
                dy = y - zy
                v = dx * dx + dy * dy
                if not squared:
                    v = math.sqrt(v)
                total += abs(v - target)
            return total
        return f2

    def f3(x: float, y: float, z: float) -> float:
        total = 0.0
        for (zx, zy, zz), target in data:
            dx = x - zx
            dy = y - zy
            dz = z - zz
            v = dx * dx + dy * dy + dz * dz
            if not squared:
                v = math.sqrt(v)
            total += abs(v - target)
        return total
    return f3


def eval_gradient(W, scenario: Scenario) -> np.ndarray:
    """Gradient of the objective away from the singular set.

    Refuses points within epsilon of any measurement sphere or sensor
    center, where the objective is not differentiable.
    """
    p = as_point(W)
    if p.shape[0] != scenario.dim:
        raise ScenarioError(
            f"point dimension {p.shape[0]} != scenario dimension {scenario.dim}"
        )
    grad = np.zeros(scenario.dim)
    for s in scenario.sensors:
        diff = p - s.z
        r = float(np.linalg.norm(diff))
        tol = scale_tol(r, s.d)
        if r <= tol or abs(r - s.d) <= tol:
            raise SingularPointError(
                f"gradient undefined within epsilon of sensor at {s.z.tolist()}"
            )
        sign = 1.0 if psi(r, scenario.model) > psi(s.d, scenario.model) else -1.0
        grad = grad + sign * float(psi_prime(r, scenario.model)) * diff / r
    return grad


# ---------------------------------------------------------------------------
# Solution pieces


@dataclass(frozen=True, eq=False)
class PointPiece:
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", as_point(self.coords))

    def sample(self, n: int) -> np.ndarray:
        return self.coords[None, :]

    def distance_to(self, p) -> float:
        return float(np.linalg.norm(as_point(p) - self.coords))

    def to_json(self):
        return {"kind": "point", "coords": self.coords.tolist()}


@dataclass(frozen=True, eq=False)
class SegmentPiece:
    segment: Segment

    def sample(self, n: int) -> np.ndarray:
        return self.segment.sample(n)

    def distance_to(self, p) -> float:
        return self.segment.distance_to(p)

    def to_json(self):
        return {
            "kind": "segment",
            "a": self.segment.a.tolist(),
            "b": self.segment.b.tolist(),
        }


@dataclass(frozen=True, eq=False)
class ArcPiece:
    arc: Arc

    def sample(self, n: int) -> np.ndarray:
        return self.arc.sample(n)

    def distance_to(self, p) -> float:
        return self.arc.distance_to(p)

    def to_json(self):
        circ = self.arc.circle
        out = {
            "kind": "arc",
            "center": circ.center.tolist(),
            "radius": circ.radius,
            "start": self.arc.start,
            "end": self.arc.end,
        }
        if circ.normal is not None:
            out["normal"] = circ.normal.tolist()
        return out


@dataclass(frozen=True, eq=False)
class CirclePiece:
    circle: CirclePrimitive

    def sample(self, n: int) -> np.ndarray:
        angles = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        return np.array([self.circle.point_at(a) for a in angles])

    def distance_to(self, p) -> float:
        return self.circle.distance_to(p)

    def to_json(self):
        out = {
            "kind": "circle",
            "center": self.circle.center.tolist(),
            "radius": self.circle.radius,
        }
        if self.circle.normal is not None:
            out["normal"] = self.circle.normal.tolist()
        return out


@dataclass(frozen=True, eq=False)
class SpherePiece:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0:
            raise ScenarioError("sphere piece radius must be positive")

    def sample(self, n: int) -> np.ndarray:
        # deterministic Fibonacci-style covering of the sphere
        idx = np.arange(n) + 0.5
        phi = np.arccos(1.0 - 2.0 * idx / n)
        theta = math.pi * (1.0 + math.sqrt(5.0)) * idx
        pts = np.stack(
            [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)],
            axis=1,
        )
        return self.center[None, :] + self.radius * pts

    def distance_to(self, p) -> float:
        return abs(float(np.linalg.norm(as_point(p) - self.center)) - self.radius)

    def to_json(self):
        return {"kind": "sphere", "center": self.center.tolist(), "radius": self.radius}


PIECE_TYPES = (PointPiece, SegmentPiece, ArcPiece, CirclePiece, SpherePiece)


@dataclass(frozen=True, eq=False)
class SolutionSet:
    """Global-minimizer set with its case label and attained value."""

    case: str
    pieces: tuple
    cardinality: float  # an int-valued float count, or math.inf
    min_value: float
    resolved: bool = True

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.cardinality)

    def sample_points(self, per_piece: int = 64) -> np.ndarray:
        chunks = [p.sample(per_piece) for p in self.pieces]
        return np.vstack(chunks) if chunks else np.empty((0, 0))

    def distance_to(self, p) -> float:
        return min(piece.distance_to(p) for piece in self.pieces)

    def to_json(self):
        card = "infinite" if not self.is_finite else f"finite:{int(self.cardinality)}"
        return {
            "case": self.case,
            "min_value": self.min_value,
            "cardinality": card,
            "resolved": self.resolved,
            "pieces": [p.to_json() for p in self.pieces],
        }


# ---------------------------------------------------------------------------
# JSON (strict field sets; unknown keys are rejected to catch fixture drift)


def _check_keys(obj: dict, required: set[str], optional: set[str], what: str):
    keys = set(obj)
    missing = required - keys
    if missing:
        raise ScenarioError(f"{what}: missing field(s) {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ScenarioError(f"{what}: unknown field(s) {sorted(unknown)}")


def scenario_to_json(s: Scenario) -> dict:
    return {
        "dim": s.dim,
        "model": s.model,
        "sensors": [{"z": sensor.z.tolist(), "d": sensor.d} for sensor in s.sensors],
    }


def scenario_from_json(obj: dict) -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario must be a JSON object")
    _check_keys(obj, {"dim", "model", "sensors"}, set(), "scenario")
    if not isinstance(obj["sensors"], list):
        raise ScenarioError("scenario.sensors must be a list")
    sensors = []
    for i, raw in enumerate(obj["sensors"]):
        if not isinstance(raw, dict):
            raise ScenarioError(f"scenario.sensors[{i}] must be an object")
        _check_keys(raw, {"z", "d"}, set(), f"scenario.sensors[{i}]")
        sensors.append(Sensor(raw["z"], raw["d"]))
    return Scenario(dim=obj["dim"], model=obj["model"], sensors=tuple(sensors))


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_json(json.load(fh))


def _piece_from_json(obj: dict, dim: int):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ScenarioError("piece must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "point":
        _check_keys(obj, {"kind", "coords"}, set(), "point piece")
        return PointPiece(obj["coords"])
    if kind == "segment":
        _check_keys(obj, {"kind", "a", "b"}, set(), "segment piece")
        return SegmentPiece(Segment(obj["a"], obj["b"]))
    if kind == "arc":
        _check_keys(obj, {"kind", "center", "radius", "start", "end"}, {"normal"},
                    "arc piece")
        circ = CirclePrimitive(obj["center"], obj["radius"], obj.get("normal"))
        return ArcPiece(Arc(circ, obj["start"], obj["end"]))
    if kind == "circle":
        _check_keys(obj, {"kind", "center", "radius"}, {"normal"}, "circle piece")
        return CirclePiece(CirclePrimitive(obj["center"], obj["radius"], obj.get("normal")))
    if kind == "sphere":
        _check_keys(obj, {"kind", "center", "radius"}, set(), "sphere piece")
        return SpherePiece(obj["center"], obj["radius"])
    raise ScenarioError(f"unknown piece kind {kind!r}")


def solution_from_json(obj: dict) -> SolutionSet:
    _check_keys(obj, {"case", "min_value", "cardinality", "resolved", "pieces"},
                set(), "solution")
    card_raw = obj["cardinality"]
    if card_raw == "infinite":
        card = INFINITE
    elif isinstance(card_raw, str) and card_raw.startswith("finite:"):
        card = float(int(card_raw.split(":", 1)[1]))
    else:
        raise ScenarioError(f"bad cardinality {card_raw!r}")
    pieces = tuple(_piece_from_json(p, None) for p in obj["pieces"])
    return SolutionSet(
        case=obj["case"],
        pieces=pieces,
        cardinality=card,
        min_value=float(obj["min_value"]),
        resolved=bool(obj["resolved"]),
    )
