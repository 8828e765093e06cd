"""Closed convex cones with closed-form distance machinery.

The library works with the negative cone ``-K`` throughout: a vector
constraint ``g(x) <=_K 0`` means ``g(x)`` lies in ``-K``.  All geometry is
Euclidean.  Methods accept a single vector or a stack of vectors along the
leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .config import get_tolerances
from .errors import DimensionMismatch, InvalidSpec
from .numerics import HalfspaceProjector, dykstra_halfspaces, lp_min

SQRT2 = math.sqrt(2.0)

INSIDE, BOUNDARY, OUTSIDE = "inside", "boundary", "outside"


class ConeSpec:
    """Base class; subclasses implement the per-cone closed forms."""

    kind: str = "cone"
    k: int

    def _vec(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.ndim == 0 or y.shape[-1] != self.k:
            raise DimensionMismatch(f"expected vectors of length {self.k}, got shape {y.shape}")
        return y

    # membership -----------------------------------------------------------
    def in_minus(self, y, tol: Optional[float] = None):
        raise NotImplementedError

    def in_cone(self, y, tol: Optional[float] = None):
        return self.in_minus(-self._vec(y), tol)

    # distances ------------------------------------------------------------
    def project_minus(self, y) -> np.ndarray:
        raise NotImplementedError

    def dist_minus(self, y):
        y = self._vec(y)
        return np.linalg.norm(y - self.project_minus(y), axis=-1)

    def dist_complement(self, y):
        raise NotImplementedError

    def complement_foot(self, y) -> np.ndarray:
        """Nearest point of the boundary of ``-K`` for a point inside ``-K``."""
        raise NotImplementedError

    def boundary_normal(self, y) -> np.ndarray:
        """Outward unit normal of a supporting half-space of ``-K`` at ``y``."""
        raise NotImplementedError

    # dual cone ------------------------------------------------------------
    def in_dual(self, lam, tol: Optional[float] = None) -> bool:
        raise NotImplementedError

    def project_dual(self, lam) -> np.ndarray:
        # Moreau: the polar of K* is -K.
        lam = self._vec(lam)
        return lam - self.project_minus(lam)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Orthant(ConeSpec):
    k: int
    kind = "orthant"

    def __post_init__(self):
        if self.k < 1:
            raise InvalidSpec("orthant dimension must be >= 1")

    def in_minus(self, y, tol=None):
        tol = get_tolerances().membership if tol is None else tol
        return np.all(self._vec(y) <= tol, axis=-1)

    def project_minus(self, y):
        return np.minimum(self._vec(y), 0.0)

    def dist_complement(self, y):
        return np.maximum(-np.max(self._vec(y), axis=-1), 0.0)

    def complement_foot(self, y):
        y = self._vec(y).copy()
        i = int(np.argmax(y))
        y[i] = 0.0
        return y

    def boundary_normal(self, y):
        y = self._vec(y)
        tol = get_tolerances().membership
        active = np.nonzero(y >= -tol)[0]
        n = np.zeros(self.k)
        n[int(active[0]) if active.size else int(np.argmax(y))] = 1.0
        return n

    def in_dual(self, lam, tol=None):
        tol = get_tolerances().membership if tol is None else tol
        return bool(np.all(self._vec(lam) >= -tol))

    def to_dict(self):
        return {"type": "orthant", "k": self.k}


@dataclass(frozen=True)
class SecondOrder(ConeSpec):
    """``K = {(t, u) : |u| <= t}`` with ``t`` the first coordinate."""

    k: int
    kind = "second_order"

    def __post_init__(self):
        if self.k < 1:
            raise InvalidSpec("second-order cone dimension must be >= 1")

    @staticmethod
    def _split(y):
        return y[..., 0], np.linalg.norm(y[..., 1:], axis=-1)

    def in_minus(self, y, tol=None):
        tol = get_tolerances().membership if tol is None else tol
        t, n = self._split(self._vec(y))
        return n <= -t + tol

    @staticmethod
    def _project_cone(y_in):
        y = np.asarray(y_in, dtype=float).reshape(-1, y_in.shape[-1])
        t, n = y[:, 0], np.linalg.norm(y[:, 1:], axis=-1)
        out = y.copy()
        polar = n <= -t
        inside = n <= t
        mid = ~(polar | inside)
        out[polar] = 0.0
        if np.any(mid):
            ym = y[mid]
            tm, nm = t[mid], n[mid]
            coef = 0.5 * (tm + nm)
            out[mid, 0] = coef
            out[mid, 1:] = (coef / nm)[:, None] * ym[:, 1:]
        return out.reshape(y_in.shape)

    def project_minus(self, y):
        y = self._vec(y)
        return -self._project_cone(-y)

    def dist_complement(self, y):
        t, n = self._split(self._vec(y))
        if self.k == 1:
            return np.maximum(-t, 0.0)
        return np.maximum((-t - n) / SQRT2, 0.0)

    def complement_foot(self, y):
        y = self._vec(y)
        if self.k == 1:
            return np.zeros(1)
        z = -y
        s, v = z[0], z[1:]
        nv = float(np.linalg.norm(v))
        if nv > 0:
            e = v / nv
        else:
            e = np.zeros(self.k - 1)
            e[0] = 1.0
        r = 0.5 * (s + nv)
        return -np.concatenate(([r], r * e))

    def boundary_normal(self, y):
        y = self._vec(y)
        out = np.zeros(self.k)
        u = y[1:]
        nu = float(np.linalg.norm(u))
        if self.k == 1 or nu == 0.0:
            out[0] = 1.0
            return out
        out[0] = 1.0
        out[1:] = u / nu
        return out / SQRT2

    def in_dual(self, lam, tol=None):
        return bool(self.in_cone(lam, tol))

    def to_dict(self):
        return {"type": "second_order", "k": self.k}


class PolyhedralH(ConeSpec):
    """``K = {y : <n_i, y> >= 0 for all i}``; interior nonemptiness is verified."""

    kind = "polyhedral"

    def __init__(self, rows: Sequence[Sequence[float]]):
        N = np.atleast_2d(np.asarray(rows, dtype=float))
        if N.size == 0 or N.shape[0] < 1:
            raise InvalidSpec("polyhedral cone needs at least one row")
        norms = np.linalg.norm(N, axis=1)
        if np.any(norms == 0):
            raise InvalidSpec("polyhedral cone rows must be nonzero")
        self.rows = N
        self.k = N.shape[1]
        self._unit = N / norms[:, None]
        self.interior_point = self._find_interior()
        try:
            self._projector: Optional[HalfspaceProjector] = HalfspaceProjector(N, np.zeros(N.shape[0]))
        except ValueError:
            self._projector = None

    def _find_interior(self, max_iter: int = 20_000) -> np.ndarray:
        # relaxed projections onto the most violated {<n_i,y> >= 1.5}; stop once all >= 1
        N = self.rows
        y = np.zeros(self.k)
        for _ in range(max_iter):
            s = N @ y
            if np.all(s >= 1.0):
                return y
            i = int(np.argmin(s))
            y = y + (1.5 - s[i]) / float(N[i] @ N[i]) * N[i]
        raise InvalidSpec("polyhedral cone appears to have empty interior")

    def __eq__(self, other):
        return isinstance(other, PolyhedralH) and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash(self.rows.tobytes())

    def __repr__(self):
        return f"PolyhedralH(rows={self.rows.tolist()!r})"

    def in_minus(self, y, tol=None):
        tol = get_tolerances().membership if tol is None else tol
        return np.all(self._vec(y) @ self._unit.T <= tol, axis=-1)

    def project_minus(self, y, method: str = "auto"):
        y = self._vec(y)
        if method == "dykstra" or self._projector is None:
            flat = y.reshape(-1, self.k)
            out = np.array([dykstra_halfspaces(self.rows, np.zeros(len(self.rows)), v) for v in flat])
            return out.reshape(y.shape)
        P, _ = self._projector.project(y.reshape(-1, self.k))
        return P.reshape(y.shape)

    def dist_complement(self, y):
        y = self._vec(y)
        return np.maximum(np.min(-(y @ self._unit.T), axis=-1), 0.0)

    def complement_foot(self, y):
        y = self._vec(y)
        s = -(self._unit @ y)
        i = int(np.argmin(s))
        return y + s[i] * self._unit[i]

    def boundary_normal(self, y):
        y = self._vec(y)
        s = self._unit @ y
        tol = get_tolerances().membership
        active = np.nonzero(s >= -tol)[0]
        i = int(active[0]) if active.size else int(np.argmax(s))
        return self._unit[i].copy()

    def in_dual(self, lam, tol=None):
        lam = self._vec(lam)
        value, _ = lp_min(np.zeros(len(self.rows)), self.rows.T, lam, tol)
        return value < math.inf

    def to_dict(self):
        return {"type": "polyhedral", "rows": self.rows.tolist()}


@dataclass(frozen=True)
class OrientedDistanceValue:
    value: float
    side: str
    witness: np.ndarray


def cone_from_dict(d: dict) -> ConeSpec:
    kind = d.get("type")
    if kind == "orthant":
        return Orthant(int(d["k"]))
    if kind in ("second_order", "soc"):
        return SecondOrder(int(d["k"]))
    if kind in ("polyhedral", "polyhedral_h"):
        return PolyhedralH(d["rows"])
    raise InvalidSpec(f"unknown cone type {kind!r}")


def in_minus_cone(K: ConeSpec, y) -> bool:
    return bool(K.in_minus(y))


def dist_to_minus_cone(K: ConeSpec, y):
    """Return ``(d, proj)``: Euclidean distance from ``y`` to ``-K`` and the nearest point."""
    y = K._vec(y)
    proj = K.project_minus(y)
    return float(np.linalg.norm(y - proj)), proj


def dist_to_complement(K: ConeSpec, y) -> float:
    """Distance from ``y`` to ``Y \\ (-K)``; zero unless ``y`` is interior to ``-K``."""
    return float(K.dist_complement(y))


def _side(K: ConeSpec, y) -> str:
    if not K.in_minus(y):
        return OUTSIDE
    return INSIDE if K.dist_complement(y) > 0 else BOUNDARY


def oriented_distance(K: ConeSpec, y) -> OrientedDistanceValue:
    """Signed distance ``d(y, -K) - d(y, Y \\ (-K))``."""
    y = K._vec(y)
    side = _side(K, y)
    if side == OUTSIDE:
        d, proj = dist_to_minus_cone(K, y)
        return OrientedDistanceValue(d, side, proj)
    if side == INSIDE:
        return OrientedDistanceValue(-float(K.dist_complement(y)), side, K.complement_foot(y))
    return OrientedDistanceValue(0.0, side, y.copy())


def delta(K: ConeSpec, Y) -> np.ndarray:
    """Vectorised oriented distance values for a stack of points."""
    Y = K._vec(Y)
    return K.dist_minus(Y) - K.dist_complement(Y)


def delta_subgradient(K: ConeSpec, y) -> np.ndarray:
    """A unit subgradient of the oriented distance at ``y``."""
    y = K._vec(y)
    side = _side(K, y)
    if side == OUTSIDE:
        _, proj = dist_to_minus_cone(K, y)
        v = y - proj
        return v / np.linalg.norm(v)
    if side == INSIDE:
        v = K.complement_foot(y) - y
        return v / np.linalg.norm(v)
    return K.boundary_normal(y)


def in_dual_cone(K: ConeSpec, lam) -> bool:
    return bool(K.in_dual(lam))
