"""Brute-force grid oracles for conjugates and distances (m <= 3).

These share no code with the closed forms they check: both oracles only
evaluate the function or the membership predicate on uniform grids.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import EmptyGrid, TooHighDimension
from ..functions import ConvexFunctionSpec
from ..geometry import LevelSet, PolyhedronH, SetSpec, contains

MAX_ORACLE_DIM = 3
_POINTS = {1: 2001, 2: 201, 3: 41}
_MAX_DOUBLINGS = 12


def _grid(center: np.ndarray, halfwidth: float, n: int) -> np.ndarray:
    axes = [np.linspace(c - halfwidth, c + halfwidth, n) for c in center]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(center))


def _zoom_max(phi: Callable[[np.ndarray], np.ndarray], m: int, halfwidth: float,
              resolution: float) -> float:
    """Maximum of a concave ``phi`` on the box, refining around the grid argmax."""
    n = _POINTS[m]
    center, hw = np.zeros(m), halfwidth
    best = -math.inf
    while True:
        G = _grid(center, hw, n)
        # stay inside the original box
        G = G[np.all(np.abs(G) <= halfwidth * (1 + 1e-12), axis=1)]
        vals = phi(G)
        i = int(np.argmax(vals))
        best = max(best, float(vals[i]))
        step = 2.0 * hw / (n - 1)
        if step <= resolution * 1e-2:
            return best
        center, hw = G[i], 4.0 * step


def oracle_conjugate(f: ConvexFunctionSpec, y, halfwidth: float = 10.0, resolution: float = 1e-3,
                     plus: bool = False) -> float:
    """``sup <y, x> - f(x)`` by gridding; ``plus`` uses ``max(f, 0)`` instead of ``f``.

    The box is doubled while the maximum keeps growing; persistent growth is
    reported as ``+inf``.
    """
    m = f.m
    if m > MAX_ORACLE_DIM:
        raise TooHighDimension(f"grid oracle supports m <= {MAX_ORACLE_DIM}, got {m}")
    y = np.asarray(y, dtype=float).reshape(m)

    def phi(X):
        fx = np.asarray(f.eval(X), dtype=float)
        if plus:
            fx = np.maximum(fx, 0.0)
        return X @ y - fx

    hw = halfwidth
    value = _zoom_max(phi, m, hw, resolution)
    for _ in range(_MAX_DOUBLINGS):
        bigger = _zoom_max(phi, m, 2.0 * hw, resolution)
        if bigger <= value + 1e-9 * (1.0 + abs(value)):
            return value
        hw, value = 2.0 * hw, bigger
    return math.inf


def _feasible(S: SetSpec, G: np.ndarray) -> np.ndarray:
    if isinstance(S, LevelSet):
        return np.asarray(S.f.eval(G)) <= 0.0
    if isinstance(S, PolyhedronH):
        return np.all(G @ S.A.T <= S.beta, axis=1)
    return np.array([contains(S, g, tol=0.0) for g in G], dtype=bool)


def oracle_distance(S: SetSpec, x, halfwidth: float = 5.0, resolution: float = 1e-2) -> float:
    """Smallest distance from ``x`` to a feasible point of a uniform grid on the box."""
    m = S.m
    if m > MAX_ORACLE_DIM:
        raise TooHighDimension(f"grid oracle supports m <= {MAX_ORACLE_DIM}, got {m}")
    x = np.asarray(x, dtype=float).reshape(m)
    n = int(round(2.0 * halfwidth / resolution)) + 1
    axis = np.linspace(-halfwidth, halfwidth, n)
    rest = _grid(np.zeros(m - 1), halfwidth, n) if m > 1 else np.zeros((1, 0))
    best = math.inf
    # one slab per value of the first coordinate keeps memory bounded
    for a in axis:
        G = np.hstack([np.full((len(rest), 1), a), rest])
        ok = _feasible(S, G)
        if np.any(ok):
            best = min(best, float(np.min(np.linalg.norm(G[ok] - x, axis=1))))
    if math.isinf(best):
        raise EmptyGrid("no grid point lies in the set")
    return best
