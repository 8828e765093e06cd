"""Instance files: parsing, serialization and the canonical test instances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from .. import cones
from ..errors import ErrorBoundError, ParseError
from ..functions import AffineMap, ConvexFunctionSpec, MaxAffine, Quadratic, Scalarized, function_from_dict

SCHEMA_VERSION = 1
KINDS = ("scalar", "vector")


@dataclass(frozen=True)
class Sampling:
    box_halfwidth: float = 10.0
    count: int = 10_000
    seed: int = 0

    def to_dict(self) -> dict:
        return {"box_halfwidth": self.box_halfwidth, "count": self.count, "seed": self.seed}


@dataclass
class InstanceSpec:
    name: str
    kind: str
    function: Optional[ConvexFunctionSpec] = None
    map: Optional[AffineMap] = None
    cone: Optional[cones.ConeSpec] = None
    slater_hint: Optional[np.ndarray] = None
    sampling: Sampling = field(default_factory=Sampling)
    scenario: Dict[str, Any] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.function.m if self.kind == "scalar" else self.map.m

    @property
    def constraint(self) -> ConvexFunctionSpec:
        """The scalar function whose zero sublevel set is the solution set."""
        return self.function if self.kind == "scalar" else Scalarized(self.map, self.cone)

    def residual(self, X) -> np.ndarray:
        """``f(x)_+`` for scalar systems, ``d(g(x), -K)`` for vector systems."""
        if self.kind == "scalar":
            return np.maximum(np.asarray(self.function.eval(X)), 0.0)
        return np.asarray(self.cone.dist_minus(self.map(X)))

    def to_dict(self) -> dict:
        d: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, "name": self.name, "kind": self.kind}
        if self.kind == "scalar":
            d["function"] = self.function.to_dict()
        else:
            d["map"] = self.map.to_dict()
            d["cone"] = self.cone.to_dict()
        if self.slater_hint is not None:
            d["slater_hint"] = np.asarray(self.slater_hint).tolist()
        d["sampling"] = self.sampling.to_dict()
        if self.scenario:
            d["scenario"] = dict(self.scenario)
        return d


def _require(d: dict, key: str):
    if key not in d:
        raise ParseError(f"missing field {key!r}")
    return d[key]


def instance_from_dict(d: dict) -> InstanceSpec:
    if not isinstance(d, dict):
        raise ParseError("instance must be a JSON object")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}")
    name = str(_require(d, "name"))
    kind = _require(d, "kind")
    if kind not in KINDS:
        raise ParseError(f"kind must be one of {KINDS}, got {kind!r}")
    sampling_d = _require(d, "sampling")
    if "seed" not in sampling_d:
        raise ParseError("sampling.seed is mandatory")
    try:
        sampling = Sampling(float(sampling_d.get("box_halfwidth", 10.0)),
                            int(sampling_d.get("count", 10_000)), int(sampling_d["seed"]))
        if kind == "scalar":
            inst = InstanceSpec(name, kind, function=function_from_dict(_require(d, "function")))
        else:
            g = AffineMap(_require(d, "map")["M"], _require(d, "map")["q"])
            K = cones.cone_from_dict(_require(d, "cone"))
            Scalarized(g, K)  # dimension check
            inst = InstanceSpec(name, kind, map=g, cone=K)
        if d.get("slater_hint") is not None:
            hint = np.asarray(d["slater_hint"], dtype=float).reshape(-1)
            if hint.size != inst.m:
                raise ParseError(f"slater_hint has length {hint.size}, expected {inst.m}")
            inst.slater_hint = hint
    except ParseError:
        raise
    except (ErrorBoundError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid instance {name!r}: {exc}") from exc
    if not (sampling.box_halfwidth > 0 and sampling.count > 0):
        raise ParseError("sampling.box_halfwidth and sampling.count must be positive")
    inst.sampling = sampling
    inst.scenario = dict(d.get("scenario", {}))
    return inst


def load_instance(path: Union[str, Path]) -> InstanceSpec:
    try:
        text = Path(path).read_text()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return instance_from_dict(data)


def dump_instance(inst: InstanceSpec, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(inst.to_dict(), indent=2) + "\n")


# ------------------------------------------------------------ canonical instances

def abs_minus_one() -> InstanceSpec:
    """|x| - 1 <= 0 on the line; S = [-1, 1]."""
    return InstanceSpec("I1", "scalar", function=MaxAffine([([1.0], 1.0), ([-1.0], 1.0)]))


def ellipse() -> InstanceSpec:
    """1/2 (x1^2 + 4 x2^2) - 1 <= 0."""
    return InstanceSpec("I2", "scalar", function=Quadratic(np.diag([1.0, 4.0]), [0.0, 0.0], 1.0))


def hoffman_interval() -> InstanceSpec:
    """x - 1 <= 0 and -x - 1 <= 0 as an orthant system; Q = [-1, 1]."""
    return InstanceSpec("I3", "vector", map=AffineMap([[1.0], [-1.0]], [-1.0, -1.0]), cone=cones.Orthant(2))


def slab() -> InstanceSpec:
    """1/2 x1^2 - 1 <= 0 on the plane; S = [-sqrt 2, sqrt 2] x R is unbounded."""
    return InstanceSpec("I4", "scalar", function=Quadratic(np.diag([1.0, 0.0]), [0.0, 0.0], 1.0))


def lorentz_interval() -> InstanceSpec:
    """g(x) = (-1, x) in minus the second-order cone; Q = [-1, 1]."""
    return InstanceSpec("I5", "vector", map=AffineMap([[0.0], [1.0]], [-1.0, 0.0]), cone=cones.SecondOrder(2))


CANONICAL = {
    "I1": abs_minus_one,
    "I2": ellipse,
    "I3": hoffman_interval,
    "I4": slab,
    "I5": lorentz_interval,
}


def canonical(name: str) -> InstanceSpec:
    return CANONICAL[name]()


def jsonable(obj):
    """Recursively convert numpy values and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj
