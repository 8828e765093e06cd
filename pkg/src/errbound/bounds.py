"""Certified error-bound constants.

For a strictly feasible point ``x0`` of a bounded solution set the constant

    alpha = diam(Q) / d(g(x0), Y \\ -K)

makes ``d(x, Q) <= alpha * d(g(x), -K)`` hold for every ``x``.  The margin in
the denominator is the largest radius of a ball around the origin contained
in ``g(x0) + K``; any smaller admissible radius gives the classical (weaker)
constant ``diam(Q) / delta``.  Both are computed here, together with an
independent sampled check of the radius identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import geometry
from .cones import (ConeSpec, Orthant, delta as oriented, delta_subgradient, dist_to_complement,
                    in_minus_cone)
from .config import get_tolerances
from .errors import (EmptySet, InfiniteDiameter, InvalidDelta, NoSlaterCertificate,
                     Unsupported, ZeroMargin)
from .functions import AffineMap, ConvexFunctionSpec, Quadratic, Scalarized, subgradient_descent

CERTIFIED, EMPIRICAL = "certified", "empirical"
QUADRATIC_REGIME = "quadratic regime: global error bound exists, constant not certified"


@dataclass(frozen=True)
class SlaterResult:
    found: bool
    point: Optional[np.ndarray] = None
    margin: float = 0.0

    def to_dict(self) -> dict:
        if not self.found:
            return {"status": "not_found"}
        return {"status": "found", "point": self.point.tolist(), "margin": self.margin}


def _descend(f: ConvexFunctionSpec, starts) -> tuple:
    best_x, best = None, math.inf
    for x in starts:
        x, v = subgradient_descent(f, x)
        if v < best:
            best_x, best = x, v
    return best_x, best


def _starts(m: int, hint) -> list:
    starts = [np.zeros(m)]
    if hint is not None:
        starts.append(np.asarray(hint, dtype=float).reshape(m))
    return starts


def find_slater_scalar(f: ConvexFunctionSpec, hint=None) -> SlaterResult:
    """Search for ``f(x0) < 0`` from the origin and an optional hint."""
    x0, best = _descend(f, _starts(f.m, hint))
    if best < -get_tolerances().slater_margin:
        return SlaterResult(True, x0, -float(f.eval(x0)))
    return SlaterResult(False)


def find_slater_vector(g: AffineMap, K: ConeSpec, hint=None) -> SlaterResult:
    """Search for ``g(x0)`` in the interior of ``-K`` by minimising the oriented distance."""
    x0, best = _descend(Scalarized(g, K), _starts(g.m, hint))
    if best < -get_tolerances().slater_margin:
        return SlaterResult(True, x0, dist_to_complement(K, g(x0)))
    return SlaterResult(False)


# ------------------------------------------------------------ inclusion radius

def _sphere(k: int, count: int, rng) -> np.ndarray:
    D = rng.standard_normal((count, k))
    return D / np.maximum(np.linalg.norm(D, axis=1), 1e-300)[:, None]


def _ascend(K: ConeSpec, y0: np.ndarray, u: np.ndarray, radius: float, steps: int = 300) -> np.ndarray:
    """Local ascent of ``u -> oriented distance of (y0 - u)`` on the sphere of given radius."""
    def psi(v):
        return float(oriented(K, y0 - v))

    best = psi(u)
    eta = radius
    for _ in range(steps):
        s = delta_subgradient(K, y0 - u)
        cand = u - eta * s
        n = np.linalg.norm(cand)
        if n == 0:
            eta *= 0.5
            continue
        cand = radius * cand / n
        val = psi(cand)
        if val > best:
            u, best = cand, val
        else:
            eta *= 0.5
            if eta < 1e-14 * radius:
                break
    return u


def sampled_inclusion(g: AffineMap, K: ConeSpec, x0, delta: float,
                      samples: int = 1000, seed: int = 0) -> bool:
    """Refute ``delta*B in g(x0) + K`` by probing the sphere of radius ``delta``.

    A point ``u`` belongs to ``g(x0) + K`` iff ``g(x0) - u`` lies in ``-K``.
    By convexity the sphere suffices.  Random directions, coordinate axes and
    local ascent from the worst probes are tried; only membership is used to
    decide.  ``True`` means no counterexample was found.
    """
    if delta <= 0:
        return True
    y0 = g(np.asarray(x0, dtype=float))
    k = y0.size
    rng = np.random.default_rng(seed)
    U = delta * np.vstack([_sphere(k, samples, rng), np.eye(k), -np.eye(k)])
    Z = y0 - U
    inside = np.asarray(K.in_minus(Z, 0.0))
    if not np.all(inside):
        return False
    scores = oriented(K, Z)
    for i in np.argsort(-scores)[:5]:
        u = _ascend(K, y0, U[i], delta)
        if not K.in_minus(y0 - u, 0.0):
            return False
    return True


def inclusion_radius_check(g: AffineMap, K: ConeSpec, x0, delta: float, method: str = "closed",
                           samples: int = 1000, seed: int = 0) -> bool:
    """Whether the ball of radius ``delta`` lies in ``g(x0) + K``."""
    if delta <= 0:
        raise InvalidDelta("delta must be positive")
    if method == "sampled":
        return sampled_inclusion(g, K, x0, delta, samples, seed)
    y0 = g(np.asarray(x0, dtype=float))
    if isinstance(K, Orthant):
        radius = float(np.min(-y0))
    else:
        radius = dist_to_complement(K, y0)
    return delta <= radius


def _diameter_of(g: AffineMap, K: ConeSpec, x0) -> geometry.DiameterResult:
    return geometry.diameter(geometry.LevelSet(Scalarized(g, K), x0))


def robinson_alpha(g: AffineMap, K: ConeSpec, x0, delta: float,
                   diam: Optional[geometry.DiameterResult] = None) -> float:
    """``diam(Q) / delta`` for an admissible inclusion radius ``delta``."""
    if delta <= 0 or not inclusion_radius_check(g, K, x0, delta):
        raise InvalidDelta(f"ball of radius {delta} is not contained in g(x0) + K")
    diam = _diameter_of(g, K, x0) if diam is None else diam
    if math.isinf(diam.value):
        raise InfiniteDiameter("solution set is unbounded")
    return diam.value / delta


# ------------------------------------------------------------ certificates

@dataclass
class BoundCertificate:
    alpha: float
    kind: str
    slater_point: np.ndarray
    margin: float
    diam: geometry.DiameterResult
    status: str
    norm: str = "euclidean"
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "kind": self.kind,
            "slater_point": self.slater_point.tolist(),
            "margin": self.margin,
            "diam": {"value": self.diam.value, "status": self.diam.status},
            "status": self.status,
            "norm": self.norm,
            "notes": list(self.notes),
        }


def _certificate(kind, x0, margin, diam: geometry.DiameterResult, notes) -> BoundCertificate:
    if not margin > 0:
        raise ZeroMargin("Slater margin must be positive")
    if math.isinf(diam.value):
        raise InfiniteDiameter("solution set is unbounded")
    status = CERTIFIED if diam.status == geometry.EXACT else EMPIRICAL
    notes = list(notes)
    if status == EMPIRICAL:
        notes.append("diameter is a lower estimate; alpha is not certified")
    return BoundCertificate(diam.value / margin, kind, np.asarray(x0, dtype=float).copy(),
                            float(margin), diam, status, notes=notes)


def alpha_bc(g: AffineMap, K: ConeSpec, x0, diamQ: Optional[geometry.DiameterResult] = None) -> BoundCertificate:
    """Sharpened constant ``diam(Q) / d(g(x0), Y \\ -K)`` for a conic-affine system."""
    margin = dist_to_complement(K, g(np.asarray(x0, dtype=float)))
    if not margin > 0:
        raise ZeroMargin("g(x0) is not interior to -K")
    diamQ = _diameter_of(g, K, x0) if diamQ is None else diamQ
    return _certificate("vector", x0, margin, diamQ, ["alpha = diam Q / distance from g(x0) to the complement of -K"])


def alpha_scalar(f: ConvexFunctionSpec, x0, diamS: Optional[geometry.DiameterResult] = None) -> BoundCertificate:
    """Scalar constant ``diam(S) / (-f(x0))``."""
    margin = -float(f.eval(np.asarray(x0, dtype=float)))
    if not margin > 0:
        raise ZeroMargin("f(x0) must be negative")
    diamS = geometry.diameter(geometry.LevelSet(f, x0)) if diamS is None else diamS
    return _certificate("scalar", x0, margin, diamS, ["alpha = diam S / (-f(x0))"])


@dataclass(frozen=True)
class EqfinalResult:
    lhs: float
    rhs: float
    gap: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "gap": self.gap}


def check_eqfinal(g: AffineMap, K: ConeSpec, x0, samples: int = 1000, seed: int = 0,
                  steps: int = 40) -> EqfinalResult:
    """Compare the complement distance with the largest sampled inclusion radius."""
    y0 = g(np.asarray(x0, dtype=float))
    if not in_minus_cone(K, y0):
        raise NoSlaterCertificate("g(x0) is not in -K")
    lhs = dist_to_complement(K, y0)
    lo, hi = 0.0, float(np.linalg.norm(y0))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid > 0 and sampled_inclusion(g, K, x0, mid, samples, seed):
            lo = mid
        else:
            hi = mid
    return EqfinalResult(lhs, lo, abs(lhs - lo))


# ------------------------------------------------------------ orchestration

@dataclass
class HypothesisReport:
    proper: bool
    slater: SlaterResult
    bounded: Optional[bool]
    nonempty: bool

    def to_dict(self) -> dict:
        return {
            "proper": self.proper,
            "slater": self.slater.to_dict(),
            "bounded": "inconclusive" if self.bounded is None else self.bounded,
            "nonempty": self.nonempty,
        }


@dataclass
class CertifyResult:
    hypotheses: HypothesisReport
    certificate: Optional[BoundCertificate] = None
    refusal: Optional[str] = None
    regime: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "hypotheses": self.hypotheses.to_dict(),
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "refusal": self.refusal,
            "regime": self.regime,
        }


def _level_set(f, x0):
    try:
        return geometry.LevelSet(f, x0)
    except EmptySet:
        return None


def certify(instance) -> CertifyResult:
    """Check hypotheses and, when they hold, emit the error-bound certificate.

    ``instance`` needs ``kind`` ("scalar" or "vector"), ``slater_hint`` and
    either ``function`` or ``map`` plus ``cone``.
    """
    hint = getattr(instance, "slater_hint", None)
    if instance.kind == "scalar":
        f = instance.function
        slater = find_slater_scalar(f, hint)
    else:
        g, K = instance.map, instance.cone
        f = Scalarized(g, K)
        slater = find_slater_vector(g, K, hint)
    S = _level_set(f, slater.point if slater.found else hint)
    report = HypothesisReport(proper=True, slater=slater, bounded=None, nonempty=S is not None)
    if S is None:
        return CertifyResult(report, refusal="nonempty: false")
    try:
        report.bounded = geometry.is_bounded(S)
    except Unsupported:
        report.bounded = None
    if not slater.found:
        return CertifyResult(report, refusal="slater: not_found")
    if report.bounded is None:
        return CertifyResult(report, refusal="bounded: inconclusive")
    if not report.bounded:
        if isinstance(f, Quadratic):
            return CertifyResult(report, refusal="bounded: false", regime=QUADRATIC_REGIME)
        return CertifyResult(report, refusal="bounded: false")
    diam = geometry.diameter(S)
    if instance.kind == "scalar":
        cert = alpha_scalar(f, slater.point, diam)
    else:
        cert = alpha_bc(g, K, slater.point, diam)
    return CertifyResult(report, certificate=cert)
