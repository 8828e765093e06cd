"""Representable proper convex functions on R^m.

Three families are supported:

* ``Quadratic``   f(x) = 1/2 <x, A x> + <b, x> - c with A positive semidefinite
* ``MaxAffine``   f(x) = max_i (<a_i, x> - beta_i)
* ``Scalarized``  f(x) = oriented distance of g(x) = M x + q to -K

Evaluation is vectorised over leading axes of ``x``; conjugates are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from . import cones
from .config import get_tolerances
from .errors import DimensionMismatch, InvalidSpec, TooLarge, Unsupported
from .numerics import INF, SymMatrix, as_sym, lp_min, pinv_apply

MAX_AFFINE_CONJUGATE_ROWS = 12


def _check(x, m: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != m:
        raise DimensionMismatch(f"expected vectors of length {m}, got shape {x.shape}")
    return x


@dataclass(frozen=True, eq=False)
class AffineMap:
    """g(x) = M x + q from R^m to R^k."""

    M: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        q = np.asarray(self.q, dtype=float).reshape(-1)
        if M.shape[0] != q.size:
            raise InvalidSpec(f"M has {M.shape[0]} rows but q has length {q.size}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "q", q)

    @property
    def m(self) -> int:
        return self.M.shape[1]

    @property
    def k(self) -> int:
        return self.M.shape[0]

    def __call__(self, x) -> np.ndarray:
        x = _check(x, self.m)
        return x @ self.M.T + self.q

    def to_dict(self) -> dict:
        return {"M": self.M.tolist(), "q": self.q.tolist()}


class ConvexFunctionSpec:
    m: int

    def eval(self, x):
        raise NotImplementedError

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def conjugate(self, y) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class Quadratic(ConvexFunctionSpec):
    def __init__(self, A, b, c: float):
        self.A: SymMatrix = as_sym(A)
        self.b = np.asarray(b, dtype=float).reshape(-1)
        self.c = float(c)
        if self.b.size != self.A.dim:
            raise InvalidSpec(f"b has length {self.b.size} but A is {self.A.dim}x{self.A.dim}")
        self.m = self.A.dim
        dec = self.A.eig
        if dec.eigenvalues[-1] < -get_tolerances().psd_rel * dec.spectral_radius:
            raise InvalidSpec(f"A is not positive semidefinite (min eigenvalue {dec.eigenvalues[-1]:.3e})")

    def __repr__(self):
        return f"Quadratic(A={self.A.entries.tolist()}, b={self.b.tolist()}, c={self.c})"

    @cached_property
    def is_positive_definite(self) -> bool:
        dec = self.A.eig
        return bool(dec.eigenvalues[-1] > get_tolerances().rank_rel * max(dec.spectral_radius, 1e-300))

    def eval(self, x):
        x = _check(x, self.m)
        Ax = x @ self.A.entries
        val = 0.5 * np.sum(x * Ax, axis=-1) + x @ self.b - self.c
        return float(val) if np.ndim(val) == 0 else val

    def subgradient(self, x):
        x = _check(x, self.m)
        return self.A.entries @ x + self.b

    def conjugate(self, y) -> float:
        y = _check(y, self.m)
        r = y - self.b
        w, in_range = pinv_apply(self.A, r)
        if not in_range:
            return INF
        return float(0.5 * r @ w + self.c)

    def to_dict(self):
        return {"type": "quadratic", "A": self.A.entries.tolist(), "b": self.b.tolist(), "c": self.c}


class MaxAffine(ConvexFunctionSpec):
    def __init__(self, rows: Sequence[Tuple[Sequence[float], float]]):
        rows = list(rows)
        if not rows:
            raise InvalidSpec("max-affine function needs at least one row")
        a = [np.asarray(r[0], dtype=float).reshape(-1) for r in rows]
        if len({v.size for v in a}) != 1:
            raise InvalidSpec("all affine pieces must share one dimension")
        self.slopes = np.array(a)
        self.offsets = np.array([float(r[1]) for r in rows])
        self.m = self.slopes.shape[1]

    @classmethod
    def from_arrays(cls, slopes, offsets) -> "MaxAffine":
        return cls(list(zip(np.atleast_2d(slopes), np.asarray(offsets).reshape(-1))))

    def __repr__(self):
        return f"MaxAffine(slopes={self.slopes.tolist()}, offsets={self.offsets.tolist()})"

    def eval(self, x):
        x = _check(x, self.m)
        val = np.max(x @ self.slopes.T - self.offsets, axis=-1)
        return float(val) if np.ndim(val) == 0 else val

    def subgradient(self, x):
        x = _check(x, self.m)
        vals = self.slopes @ x - self.offsets
        return self.slopes[int(np.argmax(vals))].copy()  # argmax returns the lowest index on ties

    def conjugate(self, y) -> float:
        """min sum(theta_i beta_i) over convex weights with sum(theta_i a_i) = y."""
        y = _check(y, self.m)
        r = len(self.offsets)
        if r > MAX_AFFINE_CONJUGATE_ROWS:
            raise TooLarge(f"conjugate supports at most {MAX_AFFINE_CONJUGATE_ROWS} rows, got {r}")
        E = np.vstack([self.slopes.T, np.ones((1, r))])
        value, _ = lp_min(self.offsets, E, np.append(y, 1.0))
        return float(value)

    def to_dict(self):
        return {"type": "max_affine",
                "rows": [[a.tolist(), float(b)] for a, b in zip(self.slopes, self.offsets)]}


class Scalarized(ConvexFunctionSpec):
    """f(x) = Delta_{-K}(g(x)) for an affine map g."""

    def __init__(self, g: AffineMap, K: cones.ConeSpec):
        if g.k != K.k:
            raise InvalidSpec(f"map has {g.k} outputs but the cone lives in R^{K.k}")
        self.g = g
        self.K = K
        self.m = g.m

    def __repr__(self):
        return f"Scalarized(g={self.g.to_dict()}, K={self.K!r})"

    def eval(self, x):
        val = cones.delta(self.K, self.g(x))
        return float(val) if np.ndim(val) == 0 else val

    def residual(self, x):
        """d(g(x), -K), the vector-system residual."""
        val = self.K.dist_minus(self.g(x))
        return float(val) if np.ndim(val) == 0 else val

    def subgradient(self, x):
        s = cones.delta_subgradient(self.K, self.g(x))
        return self.g.M.T @ s

    def conjugate(self, y) -> float:
        raise Unsupported("conjugates of scalarized maps go through the vector dual (duality.vector_dual_value)")

    def to_dict(self):
        return {"type": "scalarized", "map": self.g.to_dict(), "cone": self.K.to_dict()}


def function_from_dict(d: dict) -> ConvexFunctionSpec:
    kind = d.get("type")
    if kind == "quadratic":
        return Quadratic(d["A"], d["b"], d["c"])
    if kind == "max_affine":
        return MaxAffine([(r[0], r[1]) for r in d["rows"]])
    if kind == "scalarized":
        return Scalarized(AffineMap(d["map"]["M"], d["map"]["q"]), cones.cone_from_dict(d["cone"]))
    raise InvalidSpec(f"unknown function type {kind!r}")


def eval(f: ConvexFunctionSpec, x):  # noqa: A001 - mirrors the mathematical name
    return f.eval(x)


def plus_part(f: ConvexFunctionSpec, x):
    return np.maximum(f.eval(x), 0.0) if np.ndim(x) > 1 else max(f.eval(x), 0.0)


def conjugate(f: ConvexFunctionSpec, y) -> float:
    return f.conjugate(y)


def subgradient(f: ConvexFunctionSpec, x) -> np.ndarray:
    return f.subgradient(x)


def lambda_scaled_conjugate(f: ConvexFunctionSpec, lam: float, y) -> float:
    """(lam f)^*(y); for lam = 0 this is the conjugate of the zero function."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    y = _check(y, f.m)
    if lam == 0:
        return 0.0 if not np.any(y) else INF
    val = f.conjugate(y / lam)
    return INF if math.isinf(val) else lam * val


def subgradient_descent(f: ConvexFunctionSpec, x0, iterations: int = 10_000):
    """Polyak-type subgradient descent with an adaptively lowered target.

    Returns ``(best_x, best_value)``.  The target starts one unit below the
    incumbent and is halved whenever progress stalls.
    """
    x = np.array(_check(x0, f.m), dtype=float)
    best_x, best = x.copy(), float(f.eval(x))
    fx = best
    gap = max(1.0, abs(best))
    stall = 0
    for _ in range(iterations):
        g = f.subgradient(x)
        gg = float(g @ g)
        if gg == 0.0:
            break
        x = x - ((fx - (best - gap)) / gg) * g
        fx = float(f.eval(x))
        if fx < best - 1e-15 * (1.0 + abs(best)):
            best, best_x = fx, x.copy()
            stall = 0
        else:
            stall += 1
            if stall >= 8:
                gap *= 0.5
                stall = 0
                x, fx = best_x.copy(), best
                if gap < 1e-15 * (1.0 + abs(best)):
                    break
    return best_x, best
