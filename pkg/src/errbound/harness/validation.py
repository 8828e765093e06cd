"""Sampling-based validation of error-bound constants.

The empirical constant is the largest observed ratio ``d(x, S) / residual(x)``
over box-uniform samples.  It is a lower bound on the best constant, so an
empirical value above a certified one signals a bug.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .. import geometry
from ..config import get_tolerances
from ..parallel import map_chunks
from .instance import InstanceSpec

HISTOGRAM_BINS = 32
SOUNDNESS_SLACK = 1e-9      # relative; absorbs rounding in d(x, S) and the residual


@dataclass
class ValidationReport:
    empirical_alpha: Optional[float]
    worst_witness: Optional[np.ndarray]
    ratio_histogram: dict
    sample_count: int
    positive_count: int
    radius: float
    certificate_alpha: Optional[float] = None
    sound: Optional[bool] = None
    plateau_trace: List[Tuple[float, Optional[float]]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "empirical_alpha": self.empirical_alpha,
            "worst_witness": None if self.worst_witness is None else self.worst_witness.tolist(),
            "ratio_histogram": self.ratio_histogram,
            "sample_count": self.sample_count,
            "positive_count": self.positive_count,
            "radius": self.radius,
            "certificate_alpha": self.certificate_alpha,
            "sound": self.sound,
            "plateau_trace": [list(p) for p in self.plateau_trace],
            "notes": list(self.notes),
        }


def solution_set(instance: InstanceSpec, feasible_point=None) -> geometry.LevelSet:
    hint = feasible_point if feasible_point is not None else instance.slater_hint
    return geometry.LevelSet(instance.constraint, hint)


def _histogram(ratios: np.ndarray) -> dict:
    if ratios.size == 0:
        return {"edges": [], "counts": []}
    top = float(np.max(ratios))
    counts, edges = np.histogram(ratios, bins=HISTOGRAM_BINS, range=(0.0, top if top > 0 else 1.0))
    return {"edges": edges.tolist(), "counts": counts.tolist()}


def ratios(instance: InstanceSpec, S: geometry.LevelSet, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Residuals and distance ratios (nan where the residual is not positive)."""
    res = instance.residual(X)
    pos = res > get_tolerances().residual_floor
    out = np.full(len(X), np.nan)
    if np.any(pos):
        out[pos] = geometry.distances(S, X[pos]) / res[pos]
    return res, out


def box_samples(m: int, radius: float, count: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-radius, radius, size=(count, m))


def empirical_alpha(instance: InstanceSpec, radius: Optional[float] = None, count: Optional[int] = None,
                    seed: Optional[int] = None, certificate_alpha: Optional[float] = None,
                    S: Optional[geometry.LevelSet] = None, workers: int = 1) -> ValidationReport:
    """Largest ``d(x, S) / residual(x)`` over ``count`` box-uniform samples."""
    radius = instance.sampling.box_halfwidth if radius is None else radius
    count = instance.sampling.count if count is None else count
    seed = instance.sampling.seed if seed is None else seed
    if radius <= 0:
        raise ValueError("radius must be positive")
    S = solution_set(instance) if S is None else S
    X = box_samples(instance.m, radius, count, seed)

    parts = map_chunks(lambda r: ratios(instance, S, X[r.start:r.stop])[1], count, workers)
    R = np.concatenate(parts) if parts else np.empty(0)
    pos = ~np.isnan(R)
    report = ValidationReport(None, None, _histogram(R[pos]), count, int(np.sum(pos)), radius,
                              certificate_alpha)
    if not np.any(pos):
        report.notes.append("no positive residual in the sampled box")
        return report
    worst = int(np.nanargmax(R))
    report.empirical_alpha = float(R[worst])
    report.worst_witness = X[worst].copy()
    if certificate_alpha is not None:
        report.sound = bool(report.empirical_alpha <= certificate_alpha * (1.0 + SOUNDNESS_SLACK))
    return report


def plateau_study(instance: InstanceSpec, radii: Sequence[float], count: Optional[int] = None,
                  seed: Optional[int] = None, workers: int = 1) -> ValidationReport:
    """Empirical constants over nested boxes.

    Each box contains the previous ones, so the running maximum over all
    samples drawn so far is a valid estimate of the supremum over the current
    box; the trace is therefore nondecreasing by construction.
    """
    count = instance.sampling.count if count is None else count
    seed = instance.sampling.seed if seed is None else seed
    S = solution_set(instance)
    trace: List[Tuple[float, Optional[float]]] = []
    best: Optional[float] = None
    best_witness = None
    for i, r in enumerate(sorted(radii)):
        rep = empirical_alpha(instance, r, count, seed + i, S=S, workers=workers)
        if rep.empirical_alpha is not None and (best is None or rep.empirical_alpha > best):
            best, best_witness = rep.empirical_alpha, rep.worst_witness
        trace.append((float(r), best))
    out = ValidationReport(best, best_witness, {"edges": [], "counts": []}, count * len(trace),
                           0, float(max(radii)), plateau_trace=trace)
    if best is None:
        out.notes.append("no positive residual in any sampled box")
    return out
