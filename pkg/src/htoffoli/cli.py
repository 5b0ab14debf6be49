"""Command-line front end.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import analysis, cost
from . import routines as R
from .circuit import serialize
from .poly import Polynomial
from .propagation import (
    TOFFOLI_CLASSES,
    acceptance_polynomial,
    class_distribution,
    enumerate_patterns,
    joint_error_polynomial,
    marginal_error_polynomials,
    toffoli_distill_distribution,
    toffoli_input_distribution,
    twirl_toffoli_classes,
    valid_order,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# full enumeration above this many magic inputs needs an explicit --max-weight
ENUMERATION_LIMIT = 20


class UsageError(Exception):
    pass


def _coeffs(p: Polynomial) -> list[str]:
    return [str(x) for x in p.coefficients] or ["0"]


def _emit(args, data: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(data, indent=2))
    else:
        print(text)


def _routine(args) -> R.RoutineDescriptor:
    name = args.routine
    if getattr(args, "o", None) is not None:
        if name != "h-to-toffoli":
            raise UsageError("--o only applies to h-to-toffoli")
        if args.o < 2:
            raise UsageError("--o must be at least 2")
        name = f"h-to-toffoli-{args.o}"
    try:
        return R.lookup(name)
    except KeyError:
        raise UsageError(f"unknown routine {args.routine!r}; known: {', '.join(R.REGISTRY)}") from None


def _rules(args) -> cost.CostRules:
    if getattr(args, "rules", None):
        try:
            return cost.CostRules.from_file(args.rules)
        except (OSError, cost.CostError) as e:
            raise UsageError(str(e)) from None
    return cost.PRESETS[getattr(args, "preset", "default")]


def _records(d: R.RoutineDescriptor, max_weight: int | None):
    c = d.circuit
    if d.magic_kind not in ("H", "T"):
        raise UsageError(f"{d.name} does not consume one-qubit magic states")
    if max_weight is None and c.magic_count > ENUMERATION_LIMIT:
        raise UsageError(f"{d.name} has {c.magic_count} inputs; pass --max-weight")
    try:
        return enumerate_patterns(c, max_weight=max_weight)
    except Exception as e:  # non-Pauli faults
        raise UsageError(f"{d.name} cannot be enumerated by frame propagation: {e}") from None


# --------------------------------------------------------------------------
# verbs


def cmd_verify(args) -> int:
    results = analysis.verify_identities()
    data = {"identities": [{"name": r.name, "passed": r.passed, "seconds": round(r.seconds, 3)} for r in results]}
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}" for r in results]
    ok = all(r.passed for r in results)
    if args.cross_check:
        checks = analysis.cross_validate(R.h_to_toffoli(2), analysis.toffoli_state_vector())
        bad = [c.mask for c in checks if not c.consistent]
        data["cross_check"] = {"patterns": len(checks), "inconsistent": bad}
        lines.append(f"{'PASS' if not bad else 'FAIL'}  cross-check ({len(checks)} patterns, {len(bad)} inconsistent)")
        ok = ok and not bad
    data["passed"] = ok
    _emit(args, data, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_enumerate(args) -> int:
    d = _routine(args)
    recs = _records(d, args.max_weight)
    rows = [
        {"mask": r.pattern.mask, "flagged": list(r.pattern.flagged), "accepted": r.accepted, "residual": r.residual.letters}
        for r in recs
    ]
    text = "\n".join(
        f"{row['mask']:>8}  {'accept' if row['accepted'] else 'reject'}  {row['residual']}  {row['flagged']}" for row in rows
    )
    _emit(args, {"routine": d.name, "count": len(rows), "records": rows}, text)
    return EXIT_OK


def cmd_polynomials(args) -> int:
    d = _routine(args)
    if d.output_kind == "H":
        rep = analysis.marginal_errors(d.name, args.max_weight or 2)
        data = {
            "routine": d.name,
            "exact_through": rep.exact_through,
            "method": rep.method,
            "acceptance": _coeffs(rep.acceptance),
            "marginal_errors": [_coeffs(m) for m in rep.marginals],
        }
        text = [f"a(p) = {rep.acceptance}   (exact through p^{rep.exact_through})"]
        text += [f"marginal error, output {i}: {m}" for i, m in enumerate(rep.marginals)]
        _emit(args, data, "\n".join(text))
        return EXIT_OK
    recs = _records(d, args.max_weight)
    a = acceptance_polynomial(recs)
    e = joint_error_polynomial(recs)
    top = valid_order(recs)
    data = {"routine": d.name, "patterns": len(recs), "exact_through": top, "acceptance": _coeffs(a), "error_times_acceptance": _coeffs(e)}
    text = [
        f"patterns: {len(recs)} (exact through p^{top})",
        f"a(p)      coefficients: {' '.join(_coeffs(a))}",
        f"e(p)a(p)  coefficients: {' '.join(_coeffs(e))}",
    ]
    if d.output_kind == "T":
        per = marginal_error_polynomials(recs)
        marg = {str(q): _coeffs(sum(per[q].values(), Polynomial())) for q in per}
        data["marginal_errors"] = marg
        text += [f"marginal error on qubit {q}: {' '.join(c)}" for q, c in marg.items()]
    _emit(args, data, "\n".join(text))
    return EXIT_OK


def cmd_classes(args) -> int:
    d = _routine(args)
    if d.output_kind != "TOFFOLI":
        raise UsageError("classes applies to Toffoli-state routines")
    dist = class_distribution(_records(d, args.max_weight))
    if args.twirl:
        dist = twirl_toffoli_classes(dist)
    data = {"routine": d.name, "twirled": args.twirl, "classes": {k: _coeffs(v) for k, v in dist.items()}}
    _emit(args, data, "\n".join(f"{k}  {v}" for k, v in dist.items()))
    return EXIT_OK


def _parse_input(text: str) -> tuple[str, Fraction]:
    key, _, value = text.partition("=")
    if key not in TOFFOLI_CLASSES or key == "III":
        raise UsageError(f"input class must be one of {', '.join(TOFFOLI_CLASSES[1:])}, got {key!r}")
    try:
        return key, Fraction(value or "1")
    except ValueError:
        raise UsageError(f"bad coefficient in {text!r}") from None


def cmd_distill(args) -> int:
    inputs = dict(_parse_input(s) for s in (args.input or ["IIX=1"]))
    dist_in = toffoli_input_distribution(**{k: Polynomial([0, v]) for k, v in inputs.items()})
    out = toffoli_distill_distribution(dist_in, R.toffoli_distill(args.variant))
    data = {
        "variant": args.variant,
        "inputs": {k: str(v) for k, v in inputs.items()},
        "outputs": {k: _coeffs(v) for k, v in out.items()},
    }
    text = ["inputs: " + ", ".join(f"{k} = {v}p" for k, v in inputs.items())]
    text += [f"{k}  {v}" for k, v in out.items()]
    _emit(args, data, "\n".join(text))
    return EXIT_OK


def cmd_table1(args) -> int:
    report = cost.table_one(_rules(args))
    _emit(args, report.as_dict(), report.render())
    return EXIT_OK


def cmd_export(args) -> int:
    d = _routine(args)
    text = serialize(d.circuit)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_count(args) -> int:
    d = _routine(args)
    try:
        rep = cost.count_locations(d.circuit, _rules(args), d.outputs)
    except cost.CostError as e:
        raise UsageError(str(e)) from None
    data = {"routine": d.name, **rep.as_dict()}
    text = [f"{d.name}: {rep.total} locations, {cost.render_number(rep.per_output)} per output"]
    text += [f"  {k:<22} {v}" for k, v in rep.breakdown.items() if v]
    _emit(args, data, "\n".join(text))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htoffoli", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    def add(name, func, help, routine=False, fmt=True):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        if routine:
            p.add_argument("routine")
            p.add_argument("--o", type=int, help="number of targets for h-to-toffoli")
        if fmt:
            p.add_argument("--format", choices=("text", "json"), default="text")
        return p

    p = add("verify-identities", cmd_verify, "check the circuit identities")
    p.add_argument("--cross-check", action="store_true", help="also compare every fault pattern with the state-vector simulator")
    for name, func, help in (
        ("enumerate", cmd_enumerate, "list every fault pattern and its outcome"),
        ("polynomials", cmd_polynomials, "acceptance and error polynomials"),
        ("classes", cmd_classes, "accepted residual classes of a Toffoli-state routine"),
    ):
        p = add(name, func, help, routine=True)
        p.add_argument("--max-weight", type=int, help="only patterns up to this weight")
        if name == "classes":
            p.add_argument("--twirl", action="store_true", help="project onto the Z/Z/X class group")
    p = add("distill-toffoli", cmd_distill, "class distribution after Toffoli-state distillation")
    p.add_argument("--variant", choices=("target", "control-1", "control-2"), default="target")
    p.add_argument("--input", action="append", metavar="CLASS=COEFF", help="input class probability COEFF*p (repeatable)")
    for name, func, help in (("table1", cmd_table1, "rebuild the routine comparison table"), ("count", cmd_count, "count locations")):
        p = add(name, func, help, routine=name == "count")
        p.add_argument("--rules", help="JSON file mapping cost categories to weights")
        p.add_argument("--preset", choices=tuple(cost.PRESETS), default="default")
    p = add("export", cmd_export, "write a routine in the circuit text format", routine=True, fmt=False)
    p.add_argument("--output", "-o", dest="output")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))  # exits with status 2
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
