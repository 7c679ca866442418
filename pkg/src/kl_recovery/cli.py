"""
Command-line interface.

Exit codes: 0 success or correctable, 1 input error, 2 negative verdict
(not correctable, span check failed, round-trip error above threshold).

Channel and code arguments are JSON file paths, or ``builtin:NAME`` for a
document shipped with the package (see ``kl-recovery fixtures list``).
"""

from __future__ import annotations

import argparse
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import fixtures as fx
from .errors import NotCorrectableError, RecoveryError, SpanError
from .kl import KL_TOL, RANK_TOL, verify_correctable
from .linalg import FACTOR_TOL
from .recovery import SPAN_TOL, build_recovery, extend_plan
from .serialize import (
    channel_to_dict,
    code_to_dict,
    dumps,
    load_channel,
    load_code,
    load_plan,
    matrix_to_json,
    plan_to_dict,
    write_json,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NEGATIVE = 2

BUILTIN_FILES = {
    "example1": ("example1_channel.json", "example1_code.json"),
    "example2": ("example2_channel.json", "example2_code.json"),
    "example3": ("example3_channel.json", None),
    "identity": ("identity_channel.json", "identity_code.json"),
    "non_correctable": ("non_correctable_channel.json", "non_correctable_code.json"),
    "phase_flip": ("phase_flip_channel.json", None),
}


def _resolve(arg, which):
    if not arg.startswith("builtin:"):
        return arg
    name = arg.split(":", 1)[1]
    files = BUILTIN_FILES.get(name)
    index = 0 if which == "channel" else 1
    if files is None or files[index] is None:
        raise RecoveryError(f"no built-in {which} named {name!r}")
    return str(resources.files("kl_recovery") / "data" / files[index])


def _emit(doc, out=None):
    text = dumps(doc)
    if out:
        write_json(doc, out)
    print(text)


def _base_report(args):
    return {
        "version": __version__,
        "tolerances": {
            "tol": args.tol,
            "rank_tol": args.rank_tol,
            "factor_tol": FACTOR_TOL,
        },
    }


def _report_doc(report):
    doc = {
        "verdict": "correctable" if report.correctable else "not_correctable",
        "residual": report.residual,
        "relative_residual": report.relative_residual,
        "per_pair": report.per_pair.tolist(),
        "lambda": matrix_to_json(report.lam),
        "lambda_skew": report.skew,
        "lambda_eigenvalues": report.eigenvalues.tolist(),
    }
    if report.correctable:
        doc.update(xi=matrix_to_json(report.xi), q=report.q, gamma=report.gamma)
    else:
        doc["reason"] = report.reason
    return doc


def _per_pair_table(per_pair):
    r = per_pair.shape[0]
    lines = ["per-pair residual ||W^dag F_i^dag F_j W - lambda_ij I||_F:"]
    lines.append("     " + "".join(f"{j:>11d}" for j in range(r)))
    for i in range(r):
        lines.append(f"{i:>4d} " + "".join(f"{per_pair[i, j]:>11.3e}" for j in range(r)))
    return "\n".join(lines)


def _load_pair(args):
    phi = load_channel(_resolve(args.channel, "channel"))
    code = load_code(_resolve(args.code, "code"))
    return phi, code


def cmd_verify(args):
    start = time.perf_counter()
    phi, code = _load_pair(args)
    report = verify_correctable(phi, code, tol=args.tol, rank_tol=args.rank_tol)
    doc = _base_report(args)
    doc.update(_report_doc(report))
    doc["timing"] = {"seconds": time.perf_counter() - start}
    if not report.correctable:
        print(_per_pair_table(report.per_pair), file=sys.stderr)
    _emit(doc, args.out)
    return EXIT_OK if report.correctable else EXIT_NEGATIVE


def cmd_construct(args):
    start = time.perf_counter()
    phi, code = _load_pair(args)
    report = verify_correctable(phi, code, tol=args.tol, rank_tol=args.rank_tol)
    doc = _base_report(args)
    doc.update(_report_doc(report))
    if not report.correctable:
        print(_per_pair_table(report.per_pair), file=sys.stderr)
        _emit(doc)
        return EXIT_NEGATIVE
    plan = build_recovery(phi, code, report)
    r = plan.r_unitary
    doc["R"] = matrix_to_json(r)
    doc["unitarity_residual"] = float(np.linalg.norm(r.conj().T @ r - np.eye(plan.dim)))
    doc["timing"] = {"seconds": time.perf_counter() - start}
    if args.out:
        write_json(plan_to_dict(plan), args.out)
        doc["plan_file"] = args.out
    _emit(doc)
    return EXIT_OK


def cmd_roundtrip(args):
    start = time.perf_counter()
    phi, code = _load_pair(args)
    report = verify_correctable(phi, code, tol=args.tol, rank_tol=args.rank_tol)
    doc = _base_report(args)
    doc["tolerances"]["threshold"] = args.threshold
    doc.update(verdict="correctable" if report.correctable else "not_correctable")
    if not report.correctable:
        doc["reason"] = report.reason
        _emit(doc)
        return EXIT_NEGATIVE
    plan = build_recovery(phi, code, report)
    instance = fx.CorrectableInstance(phi, code, args.channel)
    worst = fx.oracle_roundtrip(instance, trials=args.trials, seed=args.seed, r_unitary=plan.r_unitary)
    passed = worst <= args.threshold
    doc.update(
        trials=args.trials,
        seed=args.seed,
        worst_error=worst,
        passed=passed,
        timing={"seconds": time.perf_counter() - start},
    )
    _emit(doc)
    return EXIT_OK if passed else EXIT_NEGATIVE


def cmd_extend(args):
    start = time.perf_counter()
    plan = load_plan(args.plan)
    new_phi = load_channel(_resolve(args.channel, "channel"))
    doc = {"version": __version__, "tolerances": {"span_tol": args.span_tol}}
    try:
        ext = extend_plan(plan, new_phi, tol=args.span_tol)
    except SpanError as exc:
        doc.update(verdict="outside_span", span_residual=exc.residual, reason=str(exc))
        _emit(doc)
        return EXIT_NEGATIVE
    doc.update(
        verdict="extended",
        xi_tilde=matrix_to_json(ext.xi_tilde),
        T=matrix_to_json(ext.coeffs),
        span_residual=ext.relative_residual,
        span_residual_abs=ext.residual,
        trace_xi_tilde=float(np.trace(ext.xi_tilde).real),
        timing={"seconds": time.perf_counter() - start},
    )
    _emit(doc)
    return EXIT_OK


def _fixture_documents(args):
    name = args.name
    if name == "example1":
        inst = fx.example1()
        return channel_to_dict(inst.channel), code_to_dict(inst.code)
    if name == "example2":
        inst = fx.example2(args.p or (0.7, 0.1, 0.1, 0.1))
        return channel_to_dict(inst.channel), code_to_dict(inst.code)
    if name == "example3":
        phi = fx.example3(args.p or (0.4, 0.2, 0.2, 0.2), args.t or (0.3, 0.7, 1.1))
        return channel_to_dict(phi), None
    if name == "random":
        inst = fx.random_correctable(args.n, args.k, args.q, seed=args.seed)
        return channel_to_dict(inst.channel), code_to_dict(inst.code)
    if name == "identity":
        inst = fx.identity_instance(args.n)
        return channel_to_dict(inst.channel), code_to_dict(inst.code)
    if name == "non_correctable":
        phi, code = fx.non_correctable_instance()
        return channel_to_dict(phi), code_to_dict(code)
    if name == "phase_flip":
        return channel_to_dict(fx.phase_flip_channel(args.p or (0.5, 0.5))), None
    raise RecoveryError(f"unknown fixture {name!r}; known: {', '.join(fx.FIXTURES)}")


def cmd_fixtures(args):
    if args.action == "list":
        for name, text in fx.FIXTURES.items():
            print(f"{name:<16} {text}")
        return EXIT_OK
    if not args.name:
        raise RecoveryError("fixtures dump needs a fixture name")
    channel_doc, code_doc = _fixture_documents(args)
    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(channel_doc, out / f"{args.name}_channel.json")
    print(out / f"{args.name}_channel.json")
    if code_doc is not None:
        write_json(code_doc, out / f"{args.name}_code.json")
        print(out / f"{args.name}_code.json")
    return EXIT_OK


def _add_tolerances(p):
    p.add_argument("--tol", type=float, default=KL_TOL, help="relative Knill-Laflamme tolerance (default %(default)g)")
    p.add_argument("--rank-tol", type=float, default=RANK_TOL, help="relative eigenvalue cutoff (default %(default)g)")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="kl-recovery",
        description="Verify Knill-Laflamme correctability and build unitary recoveries.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check the Knill-Laflamme condition")
    p.add_argument("channel")
    p.add_argument("code")
    p.add_argument("--out", help="also write the report to this file")
    _add_tolerances(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", help="build the recovery unitary")
    p.add_argument("channel")
    p.add_argument("code")
    p.add_argument("--out", help="write the recovery plan to this file")
    _add_tolerances(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("roundtrip", help="decode random data states and report the worst error")
    p.add_argument("channel")
    p.add_argument("code")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=1e-8)
    _add_tolerances(p)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("extend", help="reuse a plan for a channel with linearly dependent errors")
    p.add_argument("plan")
    p.add_argument("channel")
    p.add_argument("--span-tol", type=float, default=SPAN_TOL)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("fixtures", help="list or dump built-in examples")
    p.add_argument("action", choices=["list", "dump"])
    p.add_argument("name", nargs="?")
    p.add_argument("--dir", default=".")
    p.add_argument("--p", type=float, nargs="+", help="probabilities")
    p.add_argument("--t", type=float, nargs=3, help="rotation angles (example3)")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotCorrectableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (RecoveryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
