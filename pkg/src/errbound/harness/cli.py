"""Command-line interface: ``errbound <command> <instance.json> [options]``."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import numpy as np

from .. import geometry
from ..bounds import certify, check_eqfinal
from ..config import set_profile
from ..duality import lemma1_sweep, lemma6_sweep
from ..errors import ErrorBoundError, ParseError
from .instance import load_instance
from .oracles import oracle_conjugate, oracle_distance
from .scenario import (EXIT_HYPOTHESES, EXIT_NUMERICAL, EXIT_OK, EXIT_PARSE, EXIT_UNSOUND,
                       eqfinal_system, render, run_scenario)
from .validation import empirical_alpha, solution_set


def _emit(args, payload: dict, lines: List[str]) -> None:
    if args.format == "machine":
        sys.stdout.write(render(payload))
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _fmt(x) -> str:
    return "none" if x is None else f"{x:.12g}" if isinstance(x, float) else str(x)


def cmd_certify(args) -> int:
    inst = load_instance(args.file)
    res = certify(inst)
    lines = [f"instance: {inst.name}"]
    if res.certificate is not None:
        c = res.certificate
        lines += [f"alpha: {_fmt(c.alpha)} ({c.status})", f"diameter: {_fmt(c.diam.value)} ({c.diam.status})",
                  f"margin: {_fmt(c.margin)}", f"slater point: {np.round(c.slater_point, 12).tolist()}"]
    else:
        lines.append(f"refused: {res.refusal}")
        if res.regime:
            lines.append(res.regime)
    _emit(args, res.to_dict(), lines)
    return EXIT_OK if res.certificate is not None else EXIT_HYPOTHESES


def cmd_validate(args) -> int:
    inst = load_instance(args.file)
    res = certify(inst)
    alpha = res.certificate.alpha if res.certificate is not None else None
    rep = empirical_alpha(inst, args.radius, args.samples, args.seed, certificate_alpha=alpha,
                          workers=args.workers)
    lines = [f"instance: {inst.name}", f"empirical alpha: {_fmt(rep.empirical_alpha)}",
             f"certified alpha: {_fmt(alpha)}", f"sound: {_fmt(rep.sound)}"]
    if rep.worst_witness is not None:
        lines.append(f"worst witness: {rep.worst_witness.tolist()}")
    _emit(args, rep.to_dict(), lines)
    return EXIT_UNSOUND if rep.sound is False else EXIT_OK


def cmd_duality(args) -> int:
    inst = load_instance(args.file)
    alpha = args.alpha
    if alpha is None:
        res = certify(inst)
        if res.certificate is None:
            print(f"refused: {res.refusal}; pass --alpha explicitly", file=sys.stderr)
            return EXIT_HYPOTHESES
        alpha = res.certificate.alpha
    S = solution_set(inst)
    if inst.kind == "scalar":
        rep = lemma1_sweep(inst.function, S, alpha, args.samples, args.seed, args.workers)
    else:
        rep = lemma6_sweep(inst.map, inst.cone, S, alpha, args.samples, args.seed, args.workers)
    lines = [f"instance: {inst.name}", f"alpha: {_fmt(alpha)} (dual radius {_fmt(rep.radius)})",
             f"verdict: {rep.verdict}", f"max violation: {_fmt(rep.max_violation)}"]
    if rep.witness is not None:
        lines.append(f"witness: {rep.witness.tolist()}")
    _emit(args, rep.to_dict(), lines)
    return EXIT_OK if rep.verdict == "holds" else EXIT_UNSOUND


def cmd_eqfinal(args) -> int:
    inst = load_instance(args.file)
    res = certify(inst)
    if not res.hypotheses.slater.found:
        print("refused: slater: not_found", file=sys.stderr)
        return EXIT_HYPOTHESES
    x0 = res.hypotheses.slater.point
    g, K = eqfinal_system(inst, x0)
    eq = check_eqfinal(g, K, x0 if inst.kind == "vector" else np.zeros(inst.m), seed=args.seed)
    lines = [f"instance: {inst.name}", f"complement distance: {_fmt(eq.lhs)}",
             f"largest sampled inclusion radius: {_fmt(eq.rhs)}", f"gap: {_fmt(eq.gap)}"]
    _emit(args, eq.to_dict(), lines)
    return EXIT_OK if eq.gap <= 1e-6 else EXIT_NUMERICAL


def cmd_oracle(args) -> int:
    inst = load_instance(args.file)
    point = np.array(args.point, dtype=float)
    if args.what == "conjugate":
        if inst.kind != "scalar":
            print("conjugate oracle needs a scalar instance", file=sys.stderr)
            return EXIT_HYPOTHESES
        value = oracle_conjugate(inst.function, point, args.halfwidth, args.resolution, plus=args.plus)
        exact = None
    else:
        S = solution_set(inst)
        value = oracle_distance(S, point, args.halfwidth, args.resolution)
        exact = geometry.project(S, point).distance
    payload = {"what": args.what, "point": point.tolist(), "oracle": value, "library": exact}
    lines = [f"{args.what} oracle at {point.tolist()}: {_fmt(value)}"]
    if exact is not None:
        lines.append(f"library value: {_fmt(exact)}")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_scenario(args) -> int:
    code, report = run_scenario(args.file, workers=args.workers, output=args.output)
    if args.format == "machine":
        sys.stdout.write(render(report))
    else:
        for name, status in sorted(report.get("checks", {}).items()):
            print(f"{name}: {status}")
        if "error" in report:
            print(f"error: {report['error']}: {report.get('detail', '')}")
        print(f"exit code: {code}")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="errbound", description="Certify and validate global error bounds.")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.add_argument("--tol-profile", choices=("default", "strict"), default="default")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("certify", help="check hypotheses and compute the certified constant")
    s.add_argument("file")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("validate", help="estimate the constant by sampling")
    s.add_argument("file")
    s.add_argument("--radius", type=float)
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("duality", help="sample the dual ball of radius 1/alpha")
    s.add_argument("file")
    s.add_argument("--alpha", type=float)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_duality)

    s = sub.add_parser("eqfinal", help="compare the Slater margin with the largest inclusion radius")
    s.add_argument("file")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_eqfinal)

    s = sub.add_parser("oracle", help="brute-force grid oracle (m <= 3)")
    s.add_argument("file")
    s.add_argument("--what", choices=("conjugate", "distance"), required=True)
    s.add_argument("--point", type=float, nargs="+", required=True)
    s.add_argument("--halfwidth", type=float, default=10.0)
    s.add_argument("--resolution", type=float, default=1e-2)
    s.add_argument("--plus", action="store_true", help="conjugate of max(f, 0) instead of f")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("scenario", help="run the full configured pipeline")
    s.add_argument("file")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--output", help="write the machine-format report to this path")
    s.set_defaults(func=cmd_scenario)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_profile(args.tol_profile)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ErrorBoundError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
