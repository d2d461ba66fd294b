"""Command-line frontend.

Every artifact is deterministic: identical configuration produces
byte-identical JSON/CSV output, so reports can be diffed and cached.
Timing goes to stderr only.  Exit codes: 0 on success, 2 when a
commutation verdict is FAIL, 1 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from fractions import Fraction
from typing import Dict, List, Optional

from . import __version__
from .compatibility import build_problem, solve_compatibility
from .diffpoly import enumerate_basis, monomial_text
from .errors import AsymintError
from .field import ModelParams
from .jordan import jordan_coefficients, verify_on_sequence
from .lattice import error_scaling
from .reduction import run_reduction

CACHE_ENV = "ASYMINT_CACHE_DIR"


class _Parser(argparse.ArgumentParser):
    """argparse with the documented usage exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact number: {text!r}") from exc


def _eps_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="asymint", description=__doc__)
    parser.add_argument("--version", action="version", version=f"asymint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dims", help="dimension and basis of one graded monomial space")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--max-field", type=int, default=1)
    p.add_argument("--grading", choices=("potential", "kdv"), default="potential")

    p = sub.add_parser("reduce", help="run the multiscale reduction and report the flows")
    p.add_argument("--s", type=int, choices=(0, 1), required=True)
    p.add_argument("--order", type=int, default=9)
    p.add_argument("--h", type=_fraction, default=None,
                   help="also evaluate every coefficient at this exact h")
    p.add_argument("--out", default=None)

    p = sub.add_parser("check", help="solve the commutation conditions at one order")
    p.add_argument("--s", type=int, choices=(0, 1), required=True)
    p.add_argument("--order", type=int, choices=(7, 9), required=True)
    p.add_argument("--symbolic-knowns", action="store_true",
                   help="keep the forcing labels symbolic in the solved output")
    p.add_argument("--out", default=None)

    p = sub.add_parser("jordan", help="re-expand a coarse difference in fine differences")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--omega", type=_fraction, required=True)
    p.add_argument("--max-i", type=int, required=True)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--verify", default=None, metavar="poly:D",
                   help="check the expansion on a degree-D polynomial sequence")
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="integrate the lattice and measure error scaling")
    p.add_argument("--s", type=int, choices=(0, 1), required=True)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--eps", type=_eps_list, default=[0.2, 0.1, 0.05])
    p.add_argument("--T", type=float, default=0.1)
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--out", default=None)

    p = sub.add_parser("proposition",
                       help="full pipeline for both lattice branches at orders 7 and 9")
    p.add_argument("--out", default=None)

    return parser


# --- artifact plumbing -----------------------------------------------------------


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _cached(key_parts: List[str], build) -> str:
    """Build the artifact text, reusing a cache file when the environment
    names a cache directory.  The key includes the package version."""
    cache_dir = os.environ.get(CACHE_ENV)
    if not cache_dir:
        return build()
    digest = hashlib.sha256("|".join([__version__, *key_parts]).encode()).hexdigest()[:24]
    path = os.path.join(cache_dir, f"asymint-{digest}.json")
    if os.path.exists(path):
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    text = build()
    os.makedirs(cache_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return text


def _stopwatch(label: str, start: float) -> None:
    sys.stderr.write(f"[{label}] {time.monotonic() - start:.2f}s\n")


# --- subcommands -----------------------------------------------------------------


def _cmd_dims(args) -> int:
    space = enumerate_basis(args.degree, args.grading, args.max_field)
    lines = [str(space.dim)] + [monomial_text(m) for m in space.monomials]
    _write("\n".join(lines) + "\n", None)
    return 0


def _reduction_payload(s: int, order: int, h: Optional[Fraction]) -> dict:
    rep = run_reduction(ModelParams(s=s), order=order)
    payload = {
        "schema": "asymint.reduce/1",
        "s": rep.s,
        "order": rep.order,
        "variant": rep.variant,
        "dispersion": {
            "relation": rep.dispersion.general_text,
            "sigma": rep.dispersion.sigma,
            "c_squared": rep.dispersion.c_squared.text(),
            "rejected": {str(k): v for k, v in rep.dispersion.rejected.items()},
        },
        "alphas": {str(k): v.text() for k, v in sorted(rep.alphas.items())},
        "betas": {str(k): v.text() for k, v in sorted(rep.betas.items())},
        "flows": {name: poly.text() for name, poly in sorted(rep.flows.items())},
        "forcings": {
            name: {
                "space": f.space,
                "coefficients": {lbl: v.text() for lbl, v in sorted(f.coefficients.items())},
            }
            for name, f in sorted(rep.forcings.items())
        },
        "stage_log": list(rep.stage_log),
    }
    if h is not None:
        payload["numeric"] = {
            "h": str(h),
            "alphas": {str(k): v.eval_float(h) for k, v in sorted(rep.alphas.items())},
            "betas": {str(k): v.eval_float(h) for k, v in sorted(rep.betas.items())},
            "forcings": {
                name: {lbl: v.eval_float(h) for lbl, v in sorted(f.coefficients.items())}
                for name, f in sorted(rep.forcings.items())
            },
        }
    return payload


def _cmd_reduce(args) -> int:
    start = time.monotonic()
    text = _cached(
        ["reduce", str(args.s), str(args.order), str(args.h)],
        lambda: _json_text(_reduction_payload(args.s, args.order, args.h)),
    )
    _stopwatch("reduce", start)
    _write(text, args.out)
    return 0


def _check_payload(s: int, order: int, symbolic: bool) -> dict:
    rep = run_reduction(ModelParams(s=s), order=order)
    problem = build_problem(rep, order)
    out = solve_compatibility(problem)
    if symbolic:
        solved = {name: poly.text() for name, poly in sorted(out.solved_coefficients.items())}
    else:
        solved = {
            name: poly.evaluate(problem.known_values).text()
            for name, poly in sorted(out.solved_coefficients.items())
        }
    return {
        "schema": "asymint.check/1",
        "s": s,
        "order": order,
        "variant": out.variant,
        "solved": solved,
        "constraints": [c.text() for c in out.residual_constraints],
        "evaluated": [v.text() for v in out.evaluated],
        "verdict": out.verdict,
        "witness": out.witness,
    }


def _cmd_check(args) -> int:
    start = time.monotonic()
    text = _cached(
        ["check", str(args.s), str(args.order), str(args.symbolic_knowns)],
        lambda: _json_text(_check_payload(args.s, args.order, args.symbolic_knowns)),
    )
    _stopwatch("check", start)
    _write(text, args.out)
    return 2 if json.loads(text)["verdict"] == "FAIL" else 0


def _cmd_jordan(args) -> int:
    exp = jordan_coefficients(args.j, args.omega, args.max_i, p=args.p)
    payload = {
        "schema": "asymint.jordan/1",
        "j": exp.target_order,
        "omega": str(exp.omega),
        "max_i": args.max_i,
        "truncation_p": exp.truncation_p,
        "coefficients": {str(i): str(c) for i, c in sorted(exp.coefficients.items())},
    }
    if args.verify is not None:
        kind, _, rest = args.verify.partition(":")
        if kind != "poly" or not rest.isdigit():
            sys.stderr.write("asymint jordan: error: --verify expects poly:D\n")
            return 1
        degree = int(rest)
        step = Fraction(1, args.omega.denominator)
        span = max(exp.target_order * args.omega.numerator,
                   max(exp.coefficients) * args.omega.denominator)
        samples = [
            sum(Fraction(m + 1) * (k * step) ** m for m in range(degree + 1))
            for k in range(span + 4)
        ]
        payload["verify"] = {
            "sequence": f"degree-{degree} polynomial",
            "step": str(step),
            "residual": str(verify_on_sequence(exp, samples, step=step)),
        }
    _write(_json_text(payload), args.out)
    return 0


def _cmd_validate(args) -> int:
    start = time.monotonic()
    result = error_scaling(args.s, args.h, args.eps, T=args.T, dt=args.dt)
    _stopwatch("validate", start)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["eps", "sup_error", "norm_drift", "slope"])
    for k, row in enumerate(result.rows):
        last = k == len(result.rows) - 1
        writer.writerow([
            f"{row.epsilon:g}",
            f"{row.sup_error:.12e}",
            f"{row.norm_drift:.12e}",
            f"{result.slope:.6f}" if last else "",
        ])
    _write(buffer.getvalue(), args.out)
    return 0


EXPECTED_PATTERN = {
    "0": {"order7": "PASS", "order9": "FAIL"},
    "1": {"order7": "PASS", "order9": "PASS"},
}


def _proposition_payload() -> dict:
    branches: Dict[str, dict] = {}
    for s in (0, 1):
        rep = run_reduction(ModelParams(s=s), order=9)
        seven = solve_compatibility(build_problem(rep, 7))
        nine = solve_compatibility(build_problem(rep, 9))
        branches[str(s)] = {
            "order7": seven.verdict,
            "order9": nine.verdict,
            "variant": nine.variant,
            "witness": nine.witness,
        }
    reproduced = all(
        branches[s][order] == verdict
        for s, orders in EXPECTED_PATTERN.items()
        for order, verdict in orders.items()
    )
    return {
        "schema": "asymint.proposition/1",
        "engine": f"asymint {__version__}",
        "branches": branches,
        "expected": EXPECTED_PATTERN,
        "reproduced": reproduced,
    }


def _cmd_proposition(args) -> int:
    start = time.monotonic()
    text = _cached(["proposition"], lambda: _json_text(_proposition_payload()))
    _stopwatch("proposition", start)
    _write(text, args.out)
    return 0 if json.loads(text)["reproduced"] else 2


_COMMANDS = {
    "dims": _cmd_dims,
    "reduce": _cmd_reduce,
    "check": _cmd_check,
    "jordan": _cmd_jordan,
    "validate": _cmd_validate,
    "proposition": _cmd_proposition,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except AsymintError as exc:
        sys.stderr.write(f"asymint {args.command}: error: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"asymint {args.command}: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
