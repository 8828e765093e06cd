"""Geometry of convex solution sets.

Three set families are represented: sublevel sets ``{x : f(x) <= 0}`` of a
representable convex function, V-polytopes, and H-polyhedra.  Internally
each set is routed to the most exact machinery available:

* polyhedral   -- H-polyhedra, max-affine level sets, affine maps into an
                  orthant or polyhedral cone
* quadratic    -- level sets of a convex quadratic
* interval     -- any one-dimensional level set (endpoints by bisection)
* conic        -- affine maps into a second-order cone (ADMM, approximate)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import cones
from .config import get_tolerances
from .errors import DimensionMismatch, EmptySet, NonConvergence, TooLarge, Unsupported
from .functions import (ConvexFunctionSpec, MaxAffine, Quadratic, Scalarized,
                        subgradient_descent)
from .numerics import INF, HalfspaceProjector, dykstra_halfspaces, find_root_1d, lp_min

EXACT, LOWER_ESTIMATE, INFINITE = "exact", "lower_estimate", "infinite"

MAX_VERTEX_DIM = 6
MAX_VERTEX_ROWS = 20


def _vec(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != m:
        raise DimensionMismatch(f"expected vectors of length {m}, got shape {x.shape}")
    return x


class SetSpec:
    m: int


class PolyhedronH(SetSpec):
    """``{x : <a_i, x> <= beta_i for all i}``."""

    def __init__(self, A, beta):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        beta = np.asarray(beta, dtype=float).reshape(-1)
        if A.shape[0] != beta.size:
            raise DimensionMismatch("A and beta disagree on the number of rows")
        zero = np.linalg.norm(A, axis=1) == 0
        if np.any(beta[zero] < 0):
            raise EmptySet("a constant row 0 <= beta with beta < 0 makes the set empty")
        self.A = A[~zero]
        self.beta = beta[~zero]
        self.m = A.shape[1]

    @classmethod
    def from_rows(cls, rows: Sequence[Tuple[Sequence[float], float]]) -> "PolyhedronH":
        return cls([r[0] for r in rows], [r[1] for r in rows])

    def __repr__(self):
        return f"PolyhedronH(A={self.A.tolist()}, beta={self.beta.tolist()})"

    @cached_property
    def projector(self) -> Optional[HalfspaceProjector]:
        if self.A.shape[0] == 0:
            return None
        try:
            return HalfspaceProjector(self.A, self.beta)
        except ValueError:
            return None

    @cached_property
    def vertex_list(self) -> np.ndarray:
        return _enumerate_vertices(self.A, self.beta)

    @cached_property
    def recession_vertices(self) -> np.ndarray:
        # vertices of {d : A d <= 0, |d|_inf <= 1}
        eye = np.eye(self.m)
        A = np.vstack([self.A, eye, -eye])
        beta = np.concatenate([np.zeros(self.A.shape[0]), np.ones(2 * self.m)])
        return _enumerate_vertices(A, beta, max_rows=None)


class PolytopeV(SetSpec):
    """Convex hull of a nonempty finite vertex list."""

    def __init__(self, vertices):
        V = np.atleast_2d(np.asarray(vertices, dtype=float))
        if V.shape[0] == 0:
            raise EmptySet("vertex list is empty")
        self.V = V
        self.m = V.shape[1]

    def __repr__(self):
        return f"PolytopeV({self.V.tolist()})"


class LevelSet(SetSpec):
    """``{x : f(x) <= 0}``, certified nonempty by a stored feasible point."""

    def __init__(self, f: ConvexFunctionSpec, feasible_point=None):
        self.f = f
        self.m = f.m
        tol = get_tolerances().membership
        if feasible_point is not None:
            x0 = _vec(feasible_point, self.m).astype(float)
            if f.eval(x0) > tol:
                x0, _ = subgradient_descent(f, x0)
        else:
            x0, _ = subgradient_descent(f, np.zeros(self.m))
        if f.eval(x0) > tol:
            raise EmptySet(f"no feasible point found (best value {f.eval(x0):.3e})")
        self.feasible_point = x0

    def __repr__(self):
        return f"LevelSet({self.f!r})"

    @cached_property
    def polyhedron(self) -> Optional[PolyhedronH]:
        return _as_polyhedron(self.f)

    @cached_property
    def interval(self) -> Tuple[float, float]:
        if self.m != 1:
            raise Unsupported("interval route needs a one-dimensional set")
        x0 = float(self.feasible_point[0])
        return _endpoint(self.f, x0, -1.0), _endpoint(self.f, x0, 1.0)


def _as_polyhedron(f: ConvexFunctionSpec) -> Optional[PolyhedronH]:
    if isinstance(f, MaxAffine):
        return PolyhedronH(f.slopes, f.offsets)
    if isinstance(f, Scalarized):
        K, M, q = f.K, f.g.M, f.g.q
        if isinstance(K, cones.Orthant) or (isinstance(K, cones.SecondOrder) and K.k == 1):
            return PolyhedronH(M, -q)
        if isinstance(K, cones.PolyhedralH):
            N = K.rows
            return PolyhedronH(N @ M, -(N @ q))
    return None


def _endpoint(f: ConvexFunctionSpec, x0: float, sign: float) -> float:
    """Far end of the one-dimensional sublevel set from ``x0`` in direction ``sign``."""
    tol = get_tolerances().membership
    step = 1.0
    while f.eval(np.array([x0 + sign * step])) <= tol:
        step *= 2.0
        if step > 2.0 ** 60:
            return sign * INF
    lo, hi = 0.0, step
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f.eval(np.array([x0 + sign * mid])) <= 0.0:
            lo = mid
        else:
            hi = mid
    return x0 + sign * lo


def _enumerate_vertices(A, beta, max_rows: Optional[int] = MAX_VERTEX_ROWS) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    beta = np.asarray(beta, dtype=float).reshape(-1)
    r, m = A.shape
    if m > MAX_VERTEX_DIM or (max_rows is not None and r > max_rows):
        raise TooLarge(f"vertex enumeration limited to m <= {MAX_VERTEX_DIM}, rows <= {max_rows}; got m={m}, rows={r}")
    tol = get_tolerances()
    norms = np.linalg.norm(A, axis=1)
    found: List[np.ndarray] = []
    for rows in itertools.combinations(range(r), m):
        B = A[list(rows)]
        if np.linalg.cond(B) > 1e12:
            continue
        v = np.linalg.solve(B, beta[list(rows)])
        if np.all(A @ v - beta <= 1e-9 * (norms + np.abs(beta))):
            if not any(np.linalg.norm(v - w) <= tol.dedup * (1.0 + np.linalg.norm(w)) for w in found):
                found.append(v)
    return np.array(found).reshape(len(found), m)


def _route(S: SetSpec) -> str:
    if isinstance(S, PolyhedronH):
        return "polyhedral"
    if isinstance(S, PolytopeV):
        return "vpolytope"
    if isinstance(S, LevelSet):
        if S.polyhedron is not None:
            return "polyhedral"
        if isinstance(S.f, Quadratic):
            return "quadratic"
        if S.m == 1:
            return "interval"
        if isinstance(S.f, Scalarized):
            return "conic"
    raise Unsupported(f"no geometry route for {S!r}")


def _poly(S: SetSpec) -> PolyhedronH:
    return S if isinstance(S, PolyhedronH) else S.polyhedron


# ---------------------------------------------------------------- membership

def contains(S: SetSpec, x, tol: Optional[float] = None) -> bool:
    tol = get_tolerances().membership if tol is None else tol
    x = _vec(x, S.m)
    if isinstance(S, PolyhedronH):
        return bool(np.all(S.A @ x - S.beta <= tol * (1.0 + np.abs(S.beta))))
    if isinstance(S, PolytopeV):
        value, _ = lp_min(np.zeros(len(S.V)), np.vstack([S.V.T, np.ones((1, len(S.V)))]), np.append(x, 1.0))
        return value < INF
    if isinstance(S.f, Scalarized):
        return bool(S.f.K.in_minus(S.f.g(x), tol))
    return bool(S.f.eval(x) <= tol)


# ---------------------------------------------------------------- projection

@dataclass(frozen=True)
class Projection:
    point: np.ndarray
    distance: float
    approximate: bool = False


def _quadratic_level_point(f: Quadratic, x: np.ndarray, mu: float) -> np.ndarray:
    dec = f.A.eig
    Q = dec.eigenvectors
    xt, bt = Q.T @ x, Q.T @ f.b
    return Q @ ((xt - mu * bt) / (1.0 + mu * dec.eigenvalues))


def _project_quadratic(f: Quadratic, x: np.ndarray) -> np.ndarray:
    if f.eval(x) <= 0:
        return x.copy()

    def phi(mu):
        return f.eval(_quadratic_level_point(f, x, mu))

    hi = 1.0
    while phi(hi) > 0:
        hi *= 4.0
        if hi > 4.0 ** 40:
            return _quadratic_level_point(f, x, hi)
    mu = find_root_1d(phi, 0.0, hi, tol=0.0)
    return _quadratic_level_point(f, x, mu)


def _frank_wolfe(V: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Away-step Frank-Wolfe for the nearest point of conv(V) to ``x``."""
    cfg = get_tolerances()
    p = len(V)
    start = int(np.argmin(np.linalg.norm(V - x, axis=1)))
    w = np.zeros(p)
    w[start] = 1.0
    z = V[start].copy()
    scale = 1.0 + float(np.max(np.abs(V))) + float(np.max(np.abs(x)))
    for _ in range(cfg.max_iter):
        grad = z - x
        scores = V @ grad
        s = int(np.argmin(scores))
        gap = float(grad @ z - scores[s])
        if gap <= cfg.frank_wolfe_gap * scale:
            return z
        act = np.nonzero(w > 0)[0]
        a = int(act[np.argmax(scores[act])])
        if gap >= float(scores[a] - grad @ z) or w[a] >= 1.0:
            d, gmax, away = V[s] - z, 1.0, False
        else:
            d, gmax, away = z - V[a], w[a] / (1.0 - w[a]), True
        dd = float(d @ d)
        if dd == 0.0:
            return z
        gamma = min(max(-float(grad @ d) / dd, 0.0), gmax)
        z = z + gamma * d
        if away:
            w *= 1.0 + gamma
            w[a] -= gamma
            if gamma == gmax:
                w[a] = 0.0
        else:
            w *= 1.0 - gamma
            w[s] += gamma
    raise NonConvergence("Frank-Wolfe did not reach the requested duality gap")


def project(S: SetSpec, x, method: str = "auto") -> Projection:
    """Nearest point of ``S`` to ``x`` and the Euclidean distance."""
    x = _vec(x, S.m).astype(float)
    route = _route(S)
    if route == "polyhedral":
        P = _poly(S)
        if P.A.shape[0] == 0:
            return Projection(x.copy(), 0.0)
        if method == "dykstra" or P.projector is None:
            p = dykstra_halfspaces(P.A, P.beta, x)
        else:
            p = P.projector.project(x[None, :])[0][0]
        return Projection(p, float(np.linalg.norm(x - p)))
    if route == "vpolytope":
        p = _frank_wolfe(S.V, x)
        return Projection(p, float(np.linalg.norm(x - p)))
    if route == "quadratic":
        p = _project_quadratic(S.f, x)
        return Projection(p, float(np.linalg.norm(x - p)))
    if route == "interval":
        lo, hi = S.interval
        p = np.clip(x, lo, hi)
        return Projection(p, float(np.linalg.norm(x - p)))
    from .conic import project_onto_conic_set
    Z, d, _ = project_onto_conic_set(S.f.g.M, S.f.g.q, S.f.K, x[None, :])
    return Projection(Z[0], float(d[0]), approximate=True)


def distances(S: SetSpec, X) -> np.ndarray:
    """Vectorised ``d(x, S)`` for the rows of ``X``."""
    X = np.atleast_2d(_vec(X, S.m)).astype(float)
    route = _route(S)
    if route == "polyhedral":
        P = _poly(S)
        if P.A.shape[0] == 0:
            return np.zeros(len(X))
        if P.projector is not None:
            return P.projector.project(X)[1]
    elif route == "quadratic":
        return _quadratic_distances(S.f, X)
    elif route == "interval":
        lo, hi = S.interval
        return np.abs(X[:, 0] - np.clip(X[:, 0], lo, hi))
    elif route == "conic":
        from .conic import project_onto_conic_set
        return project_onto_conic_set(S.f.g.M, S.f.g.q, S.f.K, X)[1]
    return np.array([project(S, x).distance for x in X])


def _quadratic_distances(f: Quadratic, X: np.ndarray) -> np.ndarray:
    dec = f.A.eig
    Q, lam = dec.eigenvectors, dec.eigenvalues
    Xt = X @ Q
    bt = Q.T @ f.b
    out = np.zeros(len(X))
    outside = f.eval(X) > 0
    if not np.any(outside):
        return out
    Xo = Xt[outside]

    def phi(mu):
        S = (Xo - mu[:, None] * bt) / (1.0 + mu[:, None] * lam)
        return 0.5 * np.sum(lam * S * S, axis=1) + S @ bt - f.c, S

    hi = np.ones(len(Xo))
    lo = np.zeros(len(Xo))
    for _ in range(40):
        pos = phi(hi)[0] > 0
        if not np.any(pos):
            break
        lo[pos] = hi[pos]
        hi[pos] *= 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        up = phi(mid)[0] > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    S = phi(hi)[1]
    out[outside] = np.linalg.norm(Xo - S, axis=1)
    return out


# ---------------------------------------------------------------- support

def vertices(P: PolyhedronH) -> np.ndarray:
    """All vertices of an H-polyhedron (m <= 6, at most 20 rows)."""
    return P.vertex_list


def _recession_unbounded(P: PolyhedronH, y: np.ndarray) -> bool:
    R = P.recession_vertices
    return bool(R.size and np.max(R @ y) > 1e-9 * (1.0 + np.linalg.norm(y)))


def support(S: SetSpec, y) -> float:
    """Support function sup over S of <y, x>."""
    y = _vec(y, S.m).astype(float)
    if not np.any(y):
        return 0.0
    route = _route(S)
    if route == "vpolytope":
        return float(np.max(S.V @ y))
    if route == "polyhedral":
        P = _poly(S)
        if P.A.shape[0] == 0 or _recession_unbounded(P, y):
            return INF
        V = P.vertex_list
        if len(V):
            return float(np.max(V @ y))
        # pointless polyhedron (contains a line): exact LP dual
        value, _ = lp_min(P.beta, P.A.T, y)
        return float(value)
    if route == "quadratic":
        f = S.f
        if not f.is_positive_definite:
            raise Unsupported("support of a degenerate quadratic level set; use duality.support_via_duality")
        center, radius2 = _ellipsoid(f)
        Ainv_y = np.linalg.solve(f.A.entries, y)
        return float(y @ center + math.sqrt(max(2.0 * radius2 * float(y @ Ainv_y), 0.0)))
    if route == "interval":
        lo, hi = S.interval
        vals = [y[0] * lo if y[0] < 0 or math.isfinite(lo) else INF,
                y[0] * hi if y[0] > 0 or math.isfinite(hi) else INF]
        return float(max(v for v in vals if not math.isnan(v)))
    from .conic import dual_conic_min
    res = dual_conic_min(S.f.g.M, S.f.g.q, S.f.K, y[None, :], cap=False)
    return float(res.values[0])


def _ellipsoid(f: Quadratic) -> Tuple[np.ndarray, float]:
    """Center and level ``r`` with S = {x : 1/2 (x - c)' A (x - c) <= r}; r = f*(0)."""
    center = -np.linalg.solve(f.A.entries, f.b)
    return center, f.conjugate(np.zeros(f.m))


# ---------------------------------------------------------------- size

@dataclass(frozen=True)
class DiameterResult:
    value: float
    status: str
    witnesses: Optional[Tuple[np.ndarray, np.ndarray]] = None


def _vertex_diameter(V: np.ndarray) -> DiameterResult:
    best, pair = 0.0, (V[0], V[0])
    for i, j in itertools.combinations(range(len(V)), 2):
        d = float(np.linalg.norm(V[i] - V[j]))
        if d > best:
            best, pair = d, (V[i], V[j])
    return DiameterResult(best, EXACT, pair)


def diameter(S: SetSpec, directions: int = 10_000, seed: int = 0) -> DiameterResult:
    route = _route(S)
    if route == "vpolytope":
        return _vertex_diameter(S.V)
    if not is_bounded(S):
        return DiameterResult(INF, INFINITE)
    if route == "polyhedral":
        return _vertex_diameter(_poly(S).vertex_list)
    if route == "quadratic":
        f = S.f
        center, r = _ellipsoid(f)
        dec = f.A.eig
        axis = dec.eigenvectors[:, -1]
        half = math.sqrt(2.0 * r / dec.eigenvalues[-1])
        return DiameterResult(2.0 * half, EXACT, (center - half * axis, center + half * axis))
    if route == "interval":
        lo, hi = S.interval
        return DiameterResult(hi - lo, EXACT, (np.array([lo]), np.array([hi])))
    from .conic import dual_conic_min
    rng = np.random.default_rng(seed)
    D = rng.standard_normal((directions, S.m))
    D /= np.linalg.norm(D, axis=1)[:, None]
    res = dual_conic_min(S.f.g.M, S.f.g.q, S.f.K, np.vstack([D, -D]), cap=False)
    widths = res.values[:directions] + res.values[directions:]
    widths = widths[np.isfinite(widths)]
    return DiameterResult(float(np.max(widths)) if widths.size else 0.0, LOWER_ESTIMATE)


def is_bounded(S: SetSpec) -> bool:
    route = _route(S)
    if route == "vpolytope":
        return True
    if route == "polyhedral":
        P = _poly(S)
        if P.A.shape[0] == 0:
            return False
        R = P.recession_vertices
        return bool(not R.size or np.max(np.abs(R)) <= 1e-9)
    if route == "quadratic":
        return S.f.is_positive_definite
    if route == "interval":
        lo, hi = S.interval
        return math.isfinite(lo) and math.isfinite(hi)
    return _conic_bounded(S.f.g.M, S.f.K)


def _conic_bounded(M: np.ndarray, K: cones.ConeSpec) -> bool:
    """Recession cone {d : M d in -K} is trivial for a second-order cone K.

    Holds iff M is injective and null(M^T) meets the interior of K* = K.
    The latter asks for z with a.z > |B z| where [a; B] spans null(M^T),
    i.e. min{|B z| : a.z = 1} < 1.
    """
    if not isinstance(K, cones.SecondOrder):
        raise Unsupported(f"no boundedness test for {K!r}")
    sv = np.linalg.svd(M, compute_uv=False)
    if M.shape[0] < M.shape[1] or sv[-1] <= 1e-12 * max(sv[0], 1e-300):
        return False
    U, s, _ = np.linalg.svd(M.T)
    rank = int(np.sum(s > 1e-12 * s[0]))
    N = np.linalg.svd(M.T)[2][rank:].T          # basis of null(M^T), shape (k, k - rank)
    if N.shape[1] == 0:
        return False
    a, B = N[0], N[1:]
    if not np.any(np.abs(a) > 1e-12):
        return False
    # component of a orthogonal to the row space of B gives min |Bz| = 0
    BtB = B.T @ B
    coef = np.linalg.lstsq(BtB, a, rcond=None)[0]
    if np.linalg.norm(BtB @ coef - a) > 1e-9 * (1.0 + np.linalg.norm(a)):
        return True
    denom = float(a @ coef)
    return denom > 1.0 + 1e-12
