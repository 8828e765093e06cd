"""Dense symmetric linear algebra and one-dimensional search kernels.

Everything here is sized for desk-scale problems (dimension at most a few
dozen) and favours exactness and determinism over speed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from .config import get_tolerances
from .errors import (AllInfinite, DimensionMismatch, EmptySet, NoBracket,
                     NonConvergence, NumericalDefect)

INF = math.inf

MAX_JACOBI_DIM = 32
_JACOBI_MAX_SWEEPS = 100


@dataclass(frozen=True)
class EigDecomposition:
    eigenvalues: np.ndarray   # descending
    eigenvectors: np.ndarray  # orthonormal columns

    @property
    def spectral_radius(self) -> float:
        if self.eigenvalues.size == 0:
            return 0.0
        return float(np.max(np.abs(self.eigenvalues)))

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """A real symmetric matrix.

    Inputs that are symmetric up to rounding (relative asymmetry at most
    ``1e-12``) are symmetrised; anything else is rejected.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionMismatch(f"expected a nonempty square matrix, got shape {a.shape}")
        scale = 1.0 + float(np.max(np.abs(a)))
        if float(np.max(np.abs(a - a.T))) > 1e-12 * scale:
            raise ValueError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eig(self) -> EigDecomposition:
        return eig_sym(self)

    def __matmul__(self, other):
        return self.entries @ other

    def __repr__(self) -> str:
        return f"SymMatrix({self.entries.tolist()!r})"


def as_sym(A) -> SymMatrix:
    return A if isinstance(A, SymMatrix) else SymMatrix(np.asarray(A, dtype=float))


def eig_sym(A) -> EigDecomposition:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Eigenvalues come back sorted in descending order together with an
    orthonormal matrix of eigenvectors (columns).
    """
    S = as_sym(A)
    n = S.dim
    if n > MAX_JACOBI_DIM:
        raise DimensionMismatch(f"eig_sym supports dim <= {MAX_JACOBI_DIM}, got {n}")
    a = np.array(S.entries, dtype=float)
    v = np.eye(n)
    total = float(np.sqrt(np.sum(a * a)))
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = float(np.sqrt(np.sum(np.triu(a, 1) ** 2)))
        if off == 0.0 or off <= 1e-17 * total:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NumericalDefect(f"Jacobi iteration did not converge in {_JACOBI_MAX_SWEEPS} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return EigDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def default_rank_tol(decomp: EigDecomposition) -> float:
    return get_tolerances().rank_rel * decomp.spectral_radius


def pinv_apply(A, v, rank_tol: Optional[float] = None) -> Tuple[np.ndarray, bool]:
    """Apply the Moore-Penrose pseudo-inverse of ``A`` to ``v``.

    Returns ``(w, in_range)`` where ``in_range`` tells whether ``v`` lies in
    the column space of ``A`` up to ``rank_tol * (1 + |v|)``.  ``v`` may carry
    leading batch dimensions; ``in_range`` is then an array.
    """
    S = as_sym(A)
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != S.dim:
        raise DimensionMismatch(f"vector of length {v.shape[-1]} for a {S.dim}x{S.dim} matrix")
    dec = S.eig
    if rank_tol is None:
        rank_tol = default_rank_tol(dec)
    keep = np.abs(dec.eigenvalues) > rank_tol
    Q = dec.eigenvectors
    coords = v @ Q
    inv = np.zeros_like(dec.eigenvalues)
    inv[keep] = 1.0 / dec.eigenvalues[keep]
    w = (coords * inv) @ Q.T
    residual = np.linalg.norm(coords[..., ~keep], axis=-1)
    in_range = residual <= rank_tol * (1.0 + np.linalg.norm(v, axis=-1))
    if np.ndim(in_range) == 0:
        in_range = bool(in_range)
    return w, in_range


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_NET_LEVELS = 12


def _finite_probe(phi: Callable[[float], float], lo: float, hi: float, tol: float):
    """Locate some point where ``phi`` is finite on successively finer nets."""
    levels = max(1, min(_NET_LEVELS, int(math.ceil(math.log2(max((hi - lo) / tol, 2.0))))))
    seen = set()
    for level in range(1, levels + 1):
        n = 2 ** level
        for i in range(n + 1):
            if i / n in seen:
                continue
            seen.add(i / n)
            t = lo + (hi - lo) * i / n
            val = phi(t)
            if val < INF:
                return t, val
    raise AllInfinite(f"objective is +inf on a {2 ** levels + 1}-point net of [{lo}, {hi}]")


def minimize_1d(phi: Callable[[float], float], lo: float, hi: float,
                tol: Optional[float] = None) -> Tuple[float, float]:
    """Golden-section search for a convex ``phi`` taking values in R or +inf.

    When both interior probes evaluate to +inf the bracket is contracted
    toward a known finite point, so convex functions whose effective domain
    is a subinterval are handled.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    tol = get_tolerances().minimize_1d if tol is None else tol
    a, b = lo, hi
    fa, fb = phi(a), phi(b)
    anchor: Optional[float] = None
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    if min(fa, fb, fc, fd) == INF:
        anchor, _ = _finite_probe(phi, lo, hi, tol)
    best_t, best_v = min(((a, fa), (b, fb), (c, fc), (d, fd)), key=lambda p: p[1])
    while b - a > tol:
        if fc == INF and fd == INF:
            if anchor is None:
                anchor = best_t if best_v < INF else _finite_probe(phi, a, b, tol)[0]
            if anchor < c:
                b = c
            elif anchor > d:
                a = d
            else:
                a, b = c, d
            c = b - _GOLDEN * (b - a)
            d = a + _GOLDEN * (b - a)
            fc, fd = phi(c), phi(d)
        elif fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = phi(d)
        for t, v in ((c, fc), (d, fd)):
            if v < best_v:
                best_t, best_v = t, v
    if best_v == INF:
        raise AllInfinite("no finite value found")
    return best_t, best_v


def find_root_1d(phi: Callable[[float], float], lo: float, hi: float,
                 tol: Optional[float] = None, max_iter: int = 400) -> float:
    """Bisection for a continuous monotone ``phi`` with a sign change on [lo, hi]."""
    tol = get_tolerances().root_1d if tol is None else tol
    flo, fhi = phi(lo), phi(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NoBracket(f"phi({lo})={flo} and phi({hi})={fhi} share a sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = phi(mid)
        if abs(fm) <= tol or hi - lo <= tol or mid in (lo, hi):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class BasisTable:
    """Precomputed basic solutions of ``E x = d, x >= 0`` for a fixed ``E``.

    Small linear programs throughout the library (conjugates of max-affine
    functions, dual-cone membership) are solved exactly by enumerating every
    square nonsingular column subset.  Tables are cached per matrix.
    """

    MAX_BASES = 200_000

    def __init__(self, E: np.ndarray):
        E = np.asarray(E, dtype=float)
        self.E = E
        rows: list = []
        for i in range(E.shape[0]):
            trial = rows + [i]
            if np.linalg.matrix_rank(E[trial]) == len(trial):
                rows = trial
        self.rows = np.array(rows, dtype=int)
        r = len(rows)
        n = E.shape[1]
        self.rank = r
        if math.comb(n, r) > self.MAX_BASES:
            raise ValueError(f"{math.comb(n, r)} candidate bases exceed the enumeration limit")
        Er = E[self.rows] if r else np.zeros((0, n))
        bases, invs = [], []
        for cols in itertools.combinations(range(n), r):
            B = Er[:, cols]
            if r and np.linalg.cond(B) > 1e12:
                continue
            bases.append(cols)
            invs.append(np.linalg.inv(B) if r else np.zeros((0, 0)))
        self.bases = np.array(bases, dtype=int).reshape(len(bases), r)
        self.invs = np.array(invs).reshape(len(bases), r, r)

    def minimize(self, c, d, tol: Optional[float] = None) -> Tuple[float, Optional[np.ndarray]]:
        """Return ``(min c.x, argmin)`` or ``(inf, None)`` when infeasible."""
        tol = get_tolerances().lp_feasibility if tol is None else tol
        c = np.asarray(c, dtype=float)
        d = np.asarray(d, dtype=float)
        n = self.E.shape[1]
        scale = 1.0 + float(np.linalg.norm(d))
        if self.rank == 0:
            if np.linalg.norm(d) <= tol * scale:
                return 0.0, np.zeros(n)
            return INF, None
        xb = np.einsum("bij,j->bi", self.invs, d[self.rows])
        ok = np.all(xb >= -tol * scale, axis=1)
        if not np.any(ok):
            return INF, None
        idx = np.nonzero(ok)[0]
        vals = np.einsum("bi,bi->b", c[self.bases[idx]], xb[idx])
        for j in idx[np.argsort(vals, kind="stable")]:
            x = np.zeros(n)
            x[self.bases[j]] = np.clip(xb[j], 0.0, None)
            if np.linalg.norm(self.E @ x - d) <= 10 * tol * scale:
                return float(c @ x), x
        return INF, None


@lru_cache(maxsize=256)
def _table(shape: Tuple[int, int], data: bytes) -> BasisTable:
    return BasisTable(np.frombuffer(data, dtype=float).reshape(shape))


def basis_table(E) -> BasisTable:
    E = np.ascontiguousarray(E, dtype=float)
    return _table(E.shape, E.tobytes())


def lp_min(c, E, d, tol: Optional[float] = None) -> Tuple[float, Optional[np.ndarray]]:
    """Minimise ``c.x`` subject to ``E x = d`` and ``x >= 0`` by basis enumeration.

    The feasible set is assumed to keep the objective bounded below.
    """
    return basis_table(E).minimize(c, d, tol)


class HalfspaceProjector:
    """Exact Euclidean projection onto ``{x : A x <= beta}`` for small systems.

    The projection lies in the relative interior of some face, which is cut
    out by a linearly independent subset of active rows; projecting onto the
    affine hull of that subset reproduces it.  Every candidate that lands in
    the polyhedron is at least as far as the true projection, so the nearest
    feasible candidate over all independent subsets is exact.
    """

    MAX_SUBSETS = 20_000

    def __init__(self, A, beta):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        beta = np.asarray(beta, dtype=float).reshape(-1)
        if A.shape[0] != beta.size:
            raise DimensionMismatch("row count of A and length of beta differ")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero rows must be removed before projection")
        self.A = A / norms[:, None]
        self.beta = beta / norms
        r, m = self.A.shape
        self.dim = m
        count = sum(math.comb(r, s) for s in range(min(r, m) + 1))
        if count > self.MAX_SUBSETS:
            raise ValueError(f"{count} active-set candidates exceed the enumeration limit")
        self.subsets = []
        for s in range(1, min(r, m) + 1):
            for rows in itertools.combinations(range(r), s):
                As = self.A[list(rows)]
                G = As @ As.T
                if np.linalg.cond(G) > 1e10:
                    continue
                Ginv = np.linalg.inv(G)
                self.subsets.append((list(rows), As, self.beta[list(rows)], As.T @ Ginv))

    def violation(self, X) -> np.ndarray:
        return np.max(X @ self.A.T - self.beta, axis=-1)

    def project(self, X, tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Project the rows of ``X``; returns ``(P, distances)``."""
        tol = get_tolerances().membership if tol is None else tol
        X = np.atleast_2d(np.asarray(X, dtype=float))
        slack = tol * (1.0 + np.abs(self.beta))
        best = X.copy()
        best_d = np.where(np.all(X @ self.A.T <= self.beta + slack, axis=1), 0.0, INF)
        todo = best_d > 0
        if not np.any(todo):
            return best, best_d
        Xt = X[todo]
        bt, bd = best[todo], best_d[todo]
        for rows, As, bs, P in self.subsets:
            Z = Xt - (Xt @ As.T - bs) @ P.T
            ok = np.all(Z @ self.A.T <= self.beta + slack, axis=1)
            if not np.any(ok):
                continue
            dist = np.linalg.norm(Xt - Z, axis=1)
            better = ok & (dist < bd)
            bt[better] = Z[better]
            bd[better] = dist[better]
        best[todo], best_d[todo] = bt, bd
        if np.any(np.isinf(best_d)):
            raise EmptySet("polyhedron appears to be empty")
        return best, best_d


def dykstra_halfspaces(A, beta, x, tol: Optional[float] = None,
                       max_iter: Optional[int] = None) -> np.ndarray:
    """Dykstra's alternating projection onto an intersection of half-spaces."""
    cfg = get_tolerances()
    tol = cfg.dykstra if tol is None else tol
    max_iter = cfg.max_iter if max_iter is None else max_iter
    A = np.atleast_2d(np.asarray(A, dtype=float))
    beta = np.asarray(beta, dtype=float).reshape(-1)
    norms2 = np.sum(A * A, axis=1)
    x = np.asarray(x, dtype=float).copy()
    incr = np.zeros_like(A)
    for _ in range(max_iter):
        moved = 0.0
        for i in range(A.shape[0]):
            y = x + incr[i]
            excess = A[i] @ y - beta[i]
            x_new = y - (excess / norms2[i]) * A[i] if excess > 0 else y
            incr[i] = y - x_new
            moved += float(np.sum((x_new - x) ** 2))
            x = x_new
        if math.sqrt(moved) <= tol:
            return x
    raise NonConvergence(f"Dykstra did not settle within {max_iter} sweeps")
