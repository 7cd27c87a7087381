"""Command-line interface: ``bellforge <command> [options]``.

Exit codes: 0 success, 1 a requested check failed, 2 usage error.
"""

import argparse
import json
import sys

from . import __version__
from ._accel import configure_threads
from .bounds import MAX_LOCAL_PARTIES, local_bound, reference_bounds
from .facets import MAX_TABLE_PARTIES, classes_to_csv, classify
from .inequalities import SignTable, mabk, svetlichny, uffink, wwzb_from_sign_table
from .quantum import (DEFAULT_SEED, MAX_DENSE_PARTIES, optimize_angles, optimize_uffink, seesaw_oracle,
                      uffink_oracle)
from .selftest import uniqueness_scan

FAMILIES = ("mabk", "svetlichny", "uffink-m", "uffink-s", "wwzb")
EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2
DEFAULT_TOL = 1e-6


class UsageError(Exception):
    pass


def _parse_table(args):
    bits = args.table
    if bits is None:
        raise UsageError("--family wwzb needs --table <bitstring of length 2^n>")
    n = len(bits).bit_length() - 1
    if args.n is not None and 2 ** args.n != len(bits):
        raise UsageError(f"--table has {len(bits)} bits but --n {args.n} needs {2 ** args.n}")
    if 2 ** n != len(bits):
        raise UsageError("--table length must be a power of two")
    try:
        return SignTable(n, bits)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_expression(args):
    """``(kind, object)`` with kind ``linear`` (BellExpression) or ``quadratic``."""
    family = args.family
    if family is None:
        family = "wwzb" if args.table is not None else None
    if family is None:
        raise UsageError("one of --family or --table is required")
    if family == "wwzb":
        return "linear", wwzb_from_sign_table(_parse_table(args))
    if args.n is None:
        raise UsageError(f"--family {family} needs --n")
    try:
        if family == "mabk":
            return "linear", mabk(args.n)
        if family == "svetlichny":
            return "linear", svetlichny(args.n, args.sign)
        return "quadratic", uffink(args.n, "mabk" if family == "uffink-m" else "svetlichny")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _quadratic_dict(q):
    return {"first": q.first.to_dict(), "second": q.second.to_dict(), "base": q.base,
            "biseparable": str(q.biseparable_bound), "quantum": str(q.quantum_bound)}


def cmd_build(args):
    kind, obj = build_expression(args)
    return (obj.to_dict() if kind == "linear" else _quadratic_dict(obj)), True


def _check_size(n, limit, what):
    if n > limit:
        raise UsageError(f"{what} is limited to n <= {limit}; got n = {n}")


def cmd_value(args):
    kind, obj = build_expression(args)
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    out = {}
    if kind == "linear":
        if args.method in ("fast", "both"):
            out["fast"] = optimize_angles(obj, seed=args.seed).to_dict()
        if args.method in ("oracle", "both"):
            _check_size(obj.n, 8, "the see-saw oracle")
            out["oracle"] = seesaw_oracle(obj, seed=args.seed).to_dict()
    else:
        if args.method in ("fast", "both"):
            out["fast"] = optimize_uffink(obj, seed=args.seed).to_dict()
        if args.method in ("oracle", "both"):
            _check_size(obj.n, 8, "the phi-scan oracle")
            out["oracle"] = uffink_oracle(obj, seed=args.seed).to_dict()
    ok = True
    if "fast" in out and "oracle" in out:
        gap = abs(out["fast"]["value"] - out["oracle"]["value"])
        ok = gap <= tol
        out["agreement"] = {"difference": gap, "tol": tol, "passed": ok}
    return out, ok


def cmd_bounds(args):
    kind, obj = build_expression(args)
    family = args.family or "wwzb"
    ref = reference_bounds(family, args.n) if family != "wwzb" else None
    out = {}
    if kind == "linear":
        _check_size(obj.n, MAX_LOCAL_PARTIES, "local bound enumeration")
        report = local_bound(obj)
        out.update(report.to_dict())
        out["strategy_count"] = report.strategy_count
    else:
        out["local"] = None
    if ref is not None:
        out["biseparable"] = str(ref.reference_biseparable)
        out["quantum"] = str(ref.reference_quantum)
        out["biseparable_value"] = float(ref.reference_biseparable)
        out["quantum_value"] = float(ref.reference_quantum)
    else:
        out.setdefault("biseparable", None)
        out.setdefault("quantum", None)
    return out, True


def cmd_selftest(args):
    kind, obj = build_expression(args)
    if kind != "linear":
        raise UsageError("selftest applies to linear expressions only")
    _check_size(obj.n, MAX_DENSE_PARTIES, "the dense fidelity check")
    return uniqueness_scan(obj, value_tol=args.tol or 1e-8, seed=args.seed).to_dict(), True


def cmd_classify(args):
    n = args.n if args.n is not None else 3
    if n < 1 or n > MAX_TABLE_PARTIES:
        raise UsageError(f"classification enumerates 2^(2^n) tables and is limited to 1 <= n <= {MAX_TABLE_PARTIES}")
    classes = classify(n, seed=args.seed)
    ok = True
    if n == 3:
        ok = sum(c.label != "trivial" for c in classes) == 4
    if args.format == "json":
        return [c.row() for c in classes], ok
    return classes_to_csv(classes), ok


def cmd_reproduce(args):
    from .acceptance import run_all
    stream = sys.stderr if args.format == "json" else None
    results = run_all(seed=args.seed, stream=stream)
    ok = all(r.passed for r in results)
    if args.format == "json":
        return [{"criterion": r.number, "name": r.name, "passed": r.passed, "detail": r.detail}
                for r in results], ok
    lines = [r.line() for r in results]
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n", ok


COMMANDS = {"build": cmd_build, "value": cmd_value, "bounds": cmd_bounds, "selftest": cmd_selftest,
            "classify": cmd_classify, "reproduce": cmd_reproduce}


def build_parser():
    parser = argparse.ArgumentParser(prog="bellforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--table", help="sign-table bitstring, bit i = 1 meaning S = -1 at index i")
        p.add_argument("--n", type=int)
        p.add_argument("--sign", choices=("+", "-"), default="+", help="Svetlichny sign")
        p.add_argument("--method", choices=("fast", "oracle", "both"), default="both")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--tol", type=float)
        p.add_argument("--out", help="write output here instead of standard output")
        if name == "reproduce":
            p.add_argument("--format", choices=("text", "json"), default="text")
        else:
            p.add_argument("--format", choices=("json", "csv"),
                           default="csv" if name == "classify" else "json")
    return parser


def _render(payload, fmt):
    if isinstance(payload, str):
        return payload
    if fmt == "csv":
        raise UsageError("this command only produces JSON")
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_threads()
    try:
        payload, ok = COMMANDS[args.command](args)
        text = _render(payload, args.format)
    except (UsageError, ValueError) as exc:
        print(f"bellforge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
