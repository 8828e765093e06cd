"""Splitting solvers for small conic problems with an affine map.

Two problems show up whenever ``g(x) = M x + q`` is constrained by a cone
without a finite facet description:

* the dual value  ``min <-q, lam>  s.t.  M^T lam = y,  lam in K*  (and |lam| <= 1)``
* the projection onto ``Q = {z : M z + q in -K}``

Both are solved by ADMM, batched over many right-hand sides at once.  Only
the cone projections from :mod:`errbound.cones` are needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cones import ConeSpec
from .config import get_tolerances
from .numerics import INF

_CHECK_EVERY = 50


@dataclass
class DualBatch:
    values: np.ndarray      # +inf where infeasible
    multipliers: np.ndarray
    feasible: np.ndarray
    iterations: int


def _project_dual(K: ConeSpec, V: np.ndarray, cap: bool) -> np.ndarray:
    P = K.project_dual(V)
    if cap:
        n = np.linalg.norm(P, axis=1)
        P = P / np.maximum(n, 1.0)[:, None]
    return P


def _separated(K: ConeSpec, V: np.ndarray, anchor: np.ndarray, cap: bool, scale: float) -> np.ndarray:
    """Rows where the hyperplane with normal ``v`` strictly separates the sets.

    ``v`` lies in range(M), so ``<v, lam>`` is constant on the affine set and
    equals ``<v, anchor>``.  Its supremum over ``K* & B`` is ``|P_K*(v)|``;
    over ``K*`` it is 0 when ``v`` is in the polar cone and +inf otherwise.
    A strict gap is a proof of infeasibility.
    """
    P = K.project_dual(V)
    pn = np.linalg.norm(P, axis=1)
    vn = np.linalg.norm(V, axis=1)
    if cap:
        sup = pn
    else:
        sup = np.where(pn <= 1e-12 * vn, 0.0, np.inf)
    return (vn > 0) & (np.sum(V * anchor, axis=1) - sup > 1e-10 * scale * np.maximum(vn, 1e-300))


def dual_conic_min(M, q, K: ConeSpec, Y, cap: bool = True,
                   tol: Optional[float] = None, max_iter: Optional[int] = None) -> DualBatch:
    """Solve ``min -<q, lam>`` over ``{lam in K* : M^T lam = y}`` for every row ``y`` of ``Y``.

    With ``cap`` the multiplier set is additionally intersected with the
    Euclidean unit ball.  Infeasible rows are reported with value ``+inf``;
    infeasibility is declared only on a separating-hyperplane certificate or
    when the iteration cap is hit with a primal residual above tolerance.
    Each row evolves independently of the others in the batch.
    """
    cfg = get_tolerances()
    tol = cfg.admm if tol is None else tol
    max_iter = min(cfg.max_iter, 50_000) if max_iter is None else max_iter
    M = np.atleast_2d(np.asarray(M, dtype=float))
    q = np.asarray(q, dtype=float).reshape(-1)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n, k = Y.shape[0], M.shape[0]
    G = M.T @ M
    Gp = np.linalg.pinv(G, rcond=1e-12)
    R = M @ Gp @ M.T                      # orthogonal projector onto range(M)
    values = np.full(n, INF)
    lams = np.zeros((n, k))
    feasible = np.zeros(n, dtype=bool)

    # y must lie in range(M^T) for the affine set to be nonempty
    reach = Y - Y @ Gp @ G
    ok_aff = np.linalg.norm(reach, axis=1) <= 1e-9 * (1.0 + np.linalg.norm(Y, axis=1))
    idx = np.nonzero(ok_aff)[0]
    if idx.size == 0:
        return DualBatch(values, lams, feasible, 0)

    scale = 1.0 + np.linalg.norm(q)
    Ya = Y[idx]
    base = Ya @ Gp @ M.T                  # min-norm solution of M^T lam = y
    rho = np.ones(idx.size)
    w = _project_dual(K, base, cap)
    u = np.zeros_like(w)
    lam = base.copy()
    it = 0
    for it in range(1, max_iter + 1):
        lam = w - u + q / rho[:, None]
        lam = lam - (lam @ M - Ya) @ Gp @ M.T
        w_prev = w
        w = _project_dual(K, lam + u, cap)
        u = u + lam - w
        if it % _CHECK_EVERY:
            continue
        rp = np.linalg.norm(lam - w, axis=1)
        rd = rho * np.linalg.norm(w - w_prev, axis=1)
        done = (rp <= tol * scale) & (rd <= tol * scale)
        infeasible = ~done & _separated(K, (lam - w) @ R, base, cap, scale)
        finished = done | infeasible
        if np.any(finished):
            rows = idx[finished]
            lams[rows] = lam[finished]
            feasible[rows] = done[finished]
            values[rows] = np.where(done[finished], -(lam[finished] @ q), INF)
            keep = ~finished
            idx, Ya, base, rho, w, u, lam = (a[keep] for a in (idx, Ya, base, rho, w, u, lam))
            rp, rd = rp[keep], rd[keep]
            if idx.size == 0:
                break
        grow = rp > 10 * rd
        shrink = rd > 10 * rp
        rho[grow] *= 2.0
        u[grow] /= 2.0
        rho[shrink] /= 2.0
        u[shrink] *= 2.0
    if idx.size:
        rp = np.linalg.norm(lam - w, axis=1)
        ok = rp <= cfg.admm_feasibility
        lams[idx] = lam
        feasible[idx] = ok
        values[idx] = np.where(ok, -(lam @ q), INF)
    return DualBatch(values, lams, feasible, it)


def project_onto_conic_set(M, q, K: ConeSpec, X, tol: Optional[float] = None,
                           max_iter: Optional[int] = None):
    """Approximate projection of each row of ``X`` onto ``{z : M z + q in -K}``.

    Returns ``(Z, distances, residual)`` where ``residual`` is the largest
    constraint violation ``d(M z + q, -K)`` over the batch.
    """
    cfg = get_tolerances()
    tol = cfg.admm if tol is None else tol
    max_iter = min(cfg.max_iter, 50_000) if max_iter is None else max_iter
    M = np.atleast_2d(np.asarray(M, dtype=float))
    q = np.asarray(q, dtype=float).reshape(-1)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m = M.shape[1]
    G = M.T @ M
    rho = 1.0 / max(np.linalg.norm(M, 2) ** 2, 1e-12)

    def solver(r):
        return np.linalg.inv(np.eye(m) + r * G)

    H = solver(rho)
    z = X.copy()
    w = K.project_minus(z @ M.T + q)
    u = np.zeros_like(w)
    scale = 1.0 + np.max(np.abs(X)) + np.linalg.norm(q)
    for it in range(1, max_iter + 1):
        z = (X + rho * (w - q - u) @ M) @ H.T
        w_prev = w
        Mz = z @ M.T + q
        w = K.project_minus(Mz + u)
        u = u + Mz - w
        if it % _CHECK_EVERY:
            continue
        rp = float(np.max(np.linalg.norm(Mz - w, axis=1)))
        rd = float(np.max(rho * np.linalg.norm((w - w_prev) @ M, axis=1)))
        if rp <= tol * scale and rd <= tol * scale:
            break
        if rp > 10 * rd:
            rho *= 2.0
            u /= 2.0
            H = solver(rho)
        elif rd > 10 * rp:
            rho /= 2.0
            u *= 2.0
            H = solver(rho)
    residual = float(np.max(K.dist_minus(z @ M.T + q)))
    return z, np.linalg.norm(X - z, axis=1), residual
