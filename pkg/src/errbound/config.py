"""Central tolerance record.

Every numeric threshold used by the library lives here so that reports can
carry the exact values they were produced with.  Two profiles exist;
``strict`` tightens the iterative stopping rules only.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Dict


@dataclass(frozen=True)
class Tolerances:
    rank_rel: float = 1e-10          # eigenvalue cutoff relative to spectral radius
    psd_rel: float = 1e-10           # most negative eigenvalue allowed, relative
    membership: float = 1e-10        # slack on defining inequalities
    minimize_1d: float = 1e-10       # bracket width for golden section
    root_1d: float = 1e-14
    dykstra: float = 1e-9            # movement per sweep
    frank_wolfe_gap: float = 1e-9
    admm: float = 1e-10              # primal/dual residual for the conic splitting solvers
    admm_feasibility: float = 1e-6   # residual above which a conic problem is declared infeasible
    violation_rel: float = 1e-6      # duality sweep violation threshold
    dedup: float = 1e-8              # vertex deduplication
    slater_margin: float = 1e-9
    residual_floor: float = 1e-12    # residuals below this count as feasible
    lp_feasibility: float = 1e-9
    max_iter: int = 100_000


PROFILES: Dict[str, Tolerances] = {
    "default": Tolerances(),
    "strict": Tolerances(
        minimize_1d=1e-12,
        dykstra=1e-11,
        frank_wolfe_gap=1e-11,
        admm=1e-12,
        max_iter=400_000,
    ),
}

_active = PROFILES["default"]


def get_tolerances() -> Tolerances:
    return _active


def set_profile(name: str) -> Tolerances:
    """Switch the process-wide tolerance profile and return it."""
    global _active
    if name not in PROFILES:
        raise KeyError(f"unknown tolerance profile {name!r}; choose from {sorted(PROFILES)}")
    _active = PROFILES[name]
    return _active


def override(**changes) -> Tolerances:
    global _active
    _active = replace(_active, **changes)
    return _active


def as_dict(tol: Tolerances | None = None) -> dict:
    return asdict(tol or _active)
