"""Conjugate duality for scalar and conic-affine constraint systems.

The central quantity is ``min over lam in [0, lam_max] of (lam f)^*(y)``.
With ``lam_max = 1`` it is the conjugate of ``f_+``; with ``lam_max = inf``
it is the Lagrange dual of ``sup {<y, x> : f(x) <= 0}`` and equals the support
function of the level set whenever a strictly feasible point exists.

Sweeps sample the dual ball of radius ``1/alpha`` and compare the dual value
against the support function.  Sampling can refute an error bound but never
prove one; reports say "holds" only in the sense of "no violation found".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import geometry
from .cones import ConeSpec
from .config import get_tolerances
from .conic import dual_conic_min
from .errors import AllInfinite, NoSlaterCertificate, Unsupported
from .functions import (AffineMap, ConvexFunctionSpec, MaxAffine, Quadratic,
                        _check, lambda_scaled_conjugate, subgradient_descent)
from .numerics import INF, lp_min, minimize_1d, pinv_apply
from .parallel import map_chunks

HOLDS, VIOLATED = "holds", "violated"
EXPANSION_CAP = 2.0 ** 20


@dataclass(frozen=True)
class DualValue:
    value: float
    lam: float
    unbounded_suspected: bool = False

    def __iter__(self):
        # allows ``value, lam = scalar_dual_value(...)``
        return iter((self.value, self.lam))


# ------------------------------------------------------------ scaled conjugates

def _null_projector(f: Quadratic) -> np.ndarray:
    dec = f.A.eig
    tol = get_tolerances().rank_rel * max(dec.spectral_radius, 1e-300)
    N = dec.eigenvectors[:, np.abs(dec.eigenvalues) <= tol]
    return N @ N.T


def _quadratic_min(f: Quadratic, y: np.ndarray, lam_max: float) -> DualValue:
    """Exact minimiser of lam -> (lam f)^*(y) on [0, lam_max]."""
    cfg = get_tolerances()
    PN = _null_projector(f)
    yn, bn = PN @ y, PN @ f.b
    scale = 1.0 + float(np.linalg.norm(y))
    if not np.any(y):
        r = f.conjugate(np.zeros(f.m))
        if math.isinf(r) or r >= 0:
            return DualValue(0.0, 0.0)
        return DualValue(lam_max * r, lam_max, math.isinf(lam_max))
    if float(bn @ bn) > (cfg.rank_rel * (1.0 + np.linalg.norm(f.b))) ** 2:
        # the domain of (lam f)^* meets y at a single multiplier
        lam = float(yn @ bn) / float(bn @ bn)
        if lam <= 0 or lam > lam_max * (1.0 + 1e-9) or np.linalg.norm(yn - lam * bn) > 1e-9 * scale:
            raise AllInfinite("y lies outside the domain of (lam f)^* for every admissible lam")
        lam = min(lam, lam_max)             # rounding can put lam just above the cap
        r = y / lam - f.b
        w, _ = pinv_apply(f.A, r)
        return DualValue(float(lam * (0.5 * r @ w + f.c)), lam)
    if np.linalg.norm(yn) > 1e-9 * scale:
        raise AllInfinite("y has a component in the null space of A")
    Ay, _ = pinv_apply(f.A, y)
    a = float(y @ Ay)
    s = float(Ay @ f.b)
    r = f.conjugate(np.zeros(f.m))          # 1/2 b'A^+b + c
    if r > 0:
        lam = min(math.sqrt(a / (2.0 * r)), lam_max)
    else:
        lam = lam_max
    if math.isinf(lam):
        return DualValue(-s if r == 0 else -INF, lam, True)
    if lam == 0.0:
        # a underflowed to zero (y is numerically 0) or the cap pins lam at 0
        if a > 0:
            raise AllInfinite("y is nonzero but the multiplier is capped at zero")
        return DualValue(-s, 0.0)
    return DualValue(a / (2.0 * lam) - s + lam * r, lam)


def _max_affine_min(f: MaxAffine, y: np.ndarray, lam_max: float) -> DualValue:
    """LP form: min sum(mu beta) s.t. sum(mu a) = y, mu >= 0, sum(mu) <= lam_max."""
    r = len(f.offsets)
    if math.isinf(lam_max):
        value, mu = lp_min(f.offsets, f.slopes.T, y)
    else:
        E = np.zeros((f.m + 1, r + 1))
        E[: f.m, :r] = f.slopes.T
        E[f.m, :] = 1.0
        value, mu = lp_min(np.append(f.offsets, 0.0), E, np.append(y, lam_max))
        mu = None if mu is None else mu[:r]
    if mu is None:
        raise AllInfinite("y lies outside the domain of (lam f)^* for every admissible lam")
    return DualValue(float(value), float(np.sum(mu)))


def _search_min(f: ConvexFunctionSpec, y: np.ndarray, lam_max: float) -> DualValue:
    """Golden-section over lam, with geometric expansion when lam_max is infinite."""
    def phi(lam):
        return lambda_scaled_conjugate(f, lam, y)

    suspect = False
    hi = lam_max
    if math.isinf(lam_max):
        hi = 1.0
        while hi < EXPANSION_CAP and phi(2.0 * hi) < phi(hi):
            hi *= 2.0
        suspect = hi >= EXPANSION_CAP
        hi *= 2.0
    lam, value = minimize_1d(phi, 0.0, hi)
    return DualValue(float(value), float(lam), suspect)


def scalar_dual_value(f: ConvexFunctionSpec, y, lam_max: float = INF,
                      method: str = "exact") -> DualValue:
    """min over lam in [0, lam_max] of (lam f)^*(y).

    ``method="exact"`` uses the closed form for quadratics and an LP for
    max-affine functions; ``method="search"`` minimises numerically over lam.
    """
    y = _check(y, f.m).astype(float)
    if method == "exact" and isinstance(f, Quadratic):
        res = _quadratic_min(f, y, lam_max)
    elif method == "exact" and isinstance(f, MaxAffine):
        res = _max_affine_min(f, y, lam_max)
    else:
        res = _search_min(f, y, lam_max)
    if math.isinf(res.value) and res.value > 0:
        raise AllInfinite("(lam f)^*(y) is +inf for every admissible lam")
    return res


def fplus_conjugate(f: ConvexFunctionSpec, y, method: str = "exact") -> DualValue:
    """Conjugate of ``max(f, 0)`` through the multiplier interval [0, 1]."""
    return scalar_dual_value(f, y, 1.0, method)


def support_via_duality(f: ConvexFunctionSpec, y, S: Optional[geometry.LevelSet] = None) -> float:
    """Support function of ``{f <= 0}`` as the Lagrange dual value.

    Requires a strictly feasible point; one is taken from ``S`` when given
    and otherwise searched for.
    """
    x0 = S.feasible_point if S is not None else np.zeros(f.m)
    if not f.eval(x0) < -get_tolerances().slater_margin:
        x0, best = subgradient_descent(f, x0)
        if not best < -get_tolerances().slater_margin:
            raise NoSlaterCertificate("no strictly feasible point; dual value may exceed the support function")
    y = _check(y, f.m)
    if not np.any(y):
        return 0.0
    try:
        return scalar_dual_value(f, y, INF).value
    except AllInfinite:
        return INF


def vector_dual_value(g: AffineMap, K: ConeSpec, y, cap: bool = True):
    """``min -<lam, q>`` over ``lam in K*``, ``|lam| <= 1``, ``M^T lam = y``.

    Returns ``(value, lam, feasible)``; infeasible problems report ``+inf``.
    """
    y = _check(y, g.m)
    res = dual_conic_min(g.M, g.q, K, y[None, :], cap=cap)
    return float(res.values[0]), res.multipliers[0], bool(res.feasible[0])


def vector_dual_values(g: AffineMap, K: ConeSpec, Y, cap: bool = True) -> np.ndarray:
    """Batched :func:`vector_dual_value`, values only."""
    Y = np.atleast_2d(_check(Y, g.m))
    return dual_conic_min(g.M, g.q, K, Y, cap=cap).values


# ------------------------------------------------------------ sweeps

@dataclass
class DualitySweepReport:
    radius: float
    sample_count: int
    max_violation: float
    max_gap: float
    argmin_lambda_range: Optional[Tuple[float, float]]
    verdict: str
    witness: Optional[np.ndarray] = None
    accuracy: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "sample_count": self.sample_count,
            "max_violation": self.max_violation,
            "max_gap": self.max_gap,
            "argmin_lambda_range": None if self.argmin_lambda_range is None else list(self.argmin_lambda_range),
            "verdict": self.verdict,
            "witness": None if self.witness is None else self.witness.tolist(),
            "accuracy": self.accuracy,
            "notes": list(self.notes),
        }


def ball_samples(m: int, radius: float, count: int, seed: int) -> np.ndarray:
    """``count`` uniform points in the radius ball followed by the 2m axis points."""
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((count, m))
    D /= np.maximum(np.linalg.norm(D, axis=1), 1e-300)[:, None]
    R = radius * rng.random(count) ** (1.0 / m)
    axes = radius * np.vstack([np.eye(m), -np.eye(m)])
    return np.vstack([D * R[:, None], axes])


def _excess(dual: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        ex = dual - sigma
    return np.where(np.isnan(ex), 0.0, ex)


def _report(Y, dual, sigma, lams, radius, count) -> DualitySweepReport:
    ex = _excess(dual, sigma)
    gap = np.abs(ex)
    tol = get_tolerances().violation_rel
    finite_sigma = np.where(np.isfinite(sigma), np.abs(sigma), 0.0)
    bad = ex > tol * (1.0 + finite_sigma)
    worst = int(np.argmax(ex)) if len(ex) else 0
    lam_range = None
    if lams is not None and np.any(np.isfinite(lams)):
        fin = lams[np.isfinite(lams)]
        lam_range = (float(np.min(fin)), float(np.max(fin)))
    if np.any(bad):
        return DualitySweepReport(radius, count, float(max(ex[worst], 0.0)), float(np.max(gap)),
                                  lam_range, VIOLATED, Y[worst].copy())
    return DualitySweepReport(radius, count, float(max(np.max(ex), 0.0)) if len(ex) else 0.0,
                              float(np.max(gap)) if len(gap) else 0.0, lam_range, HOLDS)


def _scalar_terms(f, S, Y, workers: int = 1):
    def chunk(rows):
        out = np.empty((len(rows), 3))
        for j, i in enumerate(rows):
            try:
                res = fplus_conjugate(f, Y[i])
                out[j, 0], out[j, 2] = res.value, res.lam
            except AllInfinite:
                out[j, 0], out[j, 2] = INF, np.nan
            out[j, 1] = _support(S, f, Y[i])
        return out

    parts = map_chunks(chunk, len(Y), workers)
    T = np.vstack(parts) if parts else np.empty((0, 3))
    return T[:, 0], T[:, 1], T[:, 2]


def _support(S, f, y) -> float:
    try:
        return geometry.support(S, y)
    except Unsupported:
        return support_via_duality(f, y, S)


def lemma1_sweep(f: ConvexFunctionSpec, S: geometry.LevelSet, alpha: float,
                 sample_count: int = 1000, seed: int = 0, workers: int = 1) -> DualitySweepReport:
    """Sample ``(f_+)^*(y) - sigma_S(y)`` over the ball of radius ``1/alpha``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    radius = 1.0 / alpha
    Y = ball_samples(f.m, radius, sample_count, seed)
    dual, sigma, lams = _scalar_terms(f, S, Y, workers)
    return _report(Y, dual, sigma, lams, radius, sample_count)


def lemma6_sweep(g: AffineMap, K: ConeSpec, Q: geometry.LevelSet, alpha: float,
                 sample_count: int = 1000, seed: int = 0, workers: int = 1) -> DualitySweepReport:
    """Vector analogue of :func:`lemma1_sweep` with the unit-capped conic dual."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    radius = 1.0 / alpha
    Y = ball_samples(g.m, radius, sample_count, seed)
    def chunk(rows):
        Yc = Y[rows.start:rows.stop]
        return vector_dual_values(g, K, Yc), np.array([geometry.support(Q, y) for y in Yc])

    parts = map_chunks(chunk, len(Y), workers)
    dual = np.concatenate([p[0] for p in parts])
    sigma = np.concatenate([p[1] for p in parts])
    rep = _report(Y, dual, sigma, None, radius, sample_count)
    rep.accuracy = get_tolerances().admm_feasibility
    rep.notes.append("conic dual solved by ADMM; values accurate to the recorded feasibility tolerance")
    return rep


def grid_witness_search(excess: Callable[[np.ndarray], float], m: int, radius: float,
                        points_per_axis: int = 41) -> Tuple[np.ndarray, float]:
    """Largest excess over a uniform grid of the radius ball.

    Used to pin down a violating multiplier deterministically; returns the
    grid point and its excess.
    """
    axis = np.linspace(-radius, radius, points_per_axis)
    best_y, best = np.zeros(m), -INF
    for pt in np.stack(np.meshgrid(*([axis] * m), indexing="ij"), axis=-1).reshape(-1, m):
        if np.linalg.norm(pt) > radius * (1.0 + 1e-12):
            continue
        e = excess(pt)
        if e > best:
            best_y, best = pt.copy(), e
    return best_y, best


def scalar_excess(f: ConvexFunctionSpec, S: geometry.LevelSet) -> Callable[[np.ndarray], float]:
    def excess(y):
        try:
            d = fplus_conjugate(f, y).value
        except AllInfinite:
            d = INF
        return float(_excess(np.array([d]), np.array([_support(S, f, y)]))[0])
    return excess


def vector_excess(g: AffineMap, K: ConeSpec, Q: geometry.LevelSet) -> Callable[[np.ndarray], float]:
    def excess(y):
        d = vector_dual_value(g, K, y)[0]
        return float(_excess(np.array([d]), np.array([geometry.support(Q, y)]))[0])
    return excess
