"""End-to-end scenario: certify, validate, sweep the dual ball, check the radius identity.

Exit codes::

    0  every configured check passed
    2  the instance file could not be parsed
    3  hypotheses not met, no certificate issued
    4  soundness violation (empirical constant above the one under test)
    5  internal numerical failure
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .. import __version__
from ..bounds import certify, check_eqfinal
from ..config import as_dict
from ..duality import lemma1_sweep, lemma6_sweep
from ..errors import ErrorBoundError, ParseError
from ..functions import AffineMap
from ..cones import Orthant
from .instance import InstanceSpec, jsonable, load_instance
from .validation import empirical_alpha, solution_set

EXIT_OK, EXIT_PARSE, EXIT_HYPOTHESES, EXIT_UNSOUND, EXIT_NUMERICAL = 0, 2, 3, 4, 5
EQFINAL_GAP = 1e-6

DEFAULTS = {
    "certify": True,
    "validate": True,
    "duality": {"samples": 1000},
    "eqfinal": True,
    "inject_alpha": None,
}


def _config(inst: InstanceSpec) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(inst.scenario)
    return cfg


def eqfinal_system(inst: InstanceSpec, x0):
    """The conic system used by the radius check; scalar systems use R with K = R_+."""
    if inst.kind == "vector":
        return inst.map, inst.cone
    value = float(inst.function.eval(np.asarray(x0, dtype=float)))
    return AffineMap(np.zeros((1, inst.m)), [value]), Orthant(1)


def run(inst: InstanceSpec, workers: int = 1) -> Tuple[int, dict]:
    cfg = _config(inst)
    report = {
        "schema_version": 1,
        "library_version": __version__,
        "norm": "euclidean",
        "tolerances": as_dict(),
        "instance": inst.to_dict(),
        "checks": {},
    }
    checks = report["checks"]

    cert = certify(inst)
    report["certify"] = cert.to_dict()
    if cert.certificate is None:
        checks["certify"] = "refused"
        return EXIT_HYPOTHESES, report
    checks["certify"] = cert.certificate.status

    injected = cfg.get("inject_alpha")
    alpha = float(injected) if injected is not None else cert.certificate.alpha
    report["alpha_under_test"] = alpha
    x0 = cert.certificate.slater_point
    code = EXIT_OK

    if cfg.get("validate"):
        S = solution_set(inst, x0)
        val = empirical_alpha(inst, certificate_alpha=alpha, S=S, workers=workers)
        report["validation"] = val.to_dict()
        checks["validate"] = "sound" if val.sound in (True, None) else "unsound"
        if val.sound is False:
            code = EXIT_UNSOUND

    duality_cfg = cfg.get("duality")
    if duality_cfg:
        samples = int(duality_cfg.get("samples", 1000))
        seed = inst.sampling.seed
        S = solution_set(inst, x0)
        if inst.kind == "scalar":
            sweep = lemma1_sweep(inst.function, S, alpha, samples, seed, workers)
        else:
            sweep = lemma6_sweep(inst.map, inst.cone, S, alpha, samples, seed, workers)
        report["duality"] = sweep.to_dict()
        checks["duality"] = sweep.verdict
        if sweep.verdict != "holds":
            code = EXIT_UNSOUND

    if cfg.get("eqfinal"):
        g, K = eqfinal_system(inst, x0)
        eq = check_eqfinal(g, K, np.asarray(x0, dtype=float) if inst.kind == "vector" else np.zeros(inst.m),
                           seed=inst.sampling.seed)
        report["eqfinal"] = eq.to_dict()
        ok = eq.gap <= EQFINAL_GAP
        checks["eqfinal"] = "pass" if ok else "fail"
        if not ok and code == EXIT_OK:
            code = EXIT_NUMERICAL
    return code, report


def render(report: dict) -> str:
    """Canonical machine format: sorted keys, full-precision floats."""
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def run_scenario(path: Union[str, Path], workers: int = 1,
                 output: Optional[Union[str, Path]] = None) -> Tuple[int, dict]:
    """Run the configured pipeline on an instance file and optionally write the report."""
    try:
        inst = load_instance(path)
    except ParseError as exc:
        code, report = EXIT_PARSE, {"error": "parse", "detail": str(exc)}
    else:
        try:
            code, report = run(inst, workers)
        except ErrorBoundError as exc:
            code, report = EXIT_NUMERICAL, {"error": type(exc).__name__, "detail": str(exc)}
    report["exit_code"] = code
    if output is not None:
        Path(output).write_text(render(report))
    return code, report
