"""The ``momt`` command-line driver.

Subcommands:

* ``distance <file> [--out report.json]``  — solve, report the distance
* ``geodesic <file> --out trace.json``     — solve, export the full trace
* ``operator-info <file>``                 — kernel/constant diagnostics
* ``verify <file> --suite NAME``           — seeded property suites

Exit codes: 0 success/converged, 1 parse or I/O error, 2 infeasible
endpoints, 3 solver did not converge (best iterate still reported).
``--json`` prints the machine-readable document to stdout; ``--quiet``
suppresses the human-readable lines.  The MOMT_THREADS environment
variable caps BLAS parallelism (applied on package import).
"""

from __future__ import annotations

import argparse
import sys
import warnings as _warnings

import numpy as np

from .elliptic import poincare_constant
from .geodesic import InfeasibleEndpoints, optimize_geodesic
from .hermitian import DensityMatrix
from .io import (
    ParseError,
    ProblemSpec,
    build_report,
    dump_canonical,
    export_geodesic,
    load_problem,
)
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_NOT_CONVERGED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momt",
        description="Transport distances and geodesics between density matrices.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true",
                        help="suppress human-readable output")
    common.add_argument("--json", action="store_true",
                        help="print the machine-readable document to stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", parents=[common],
                       help="compute the transport distance between the endpoints")
    p.add_argument("problem", help="problem file (JSON)")
    p.add_argument("--out", metavar="PATH", help="write the full run report here")

    p = sub.add_parser("geodesic", parents=[common],
                       help="solve and export the discrete geodesic trace")
    p.add_argument("problem", help="problem file (JSON)")
    p.add_argument("--out", metavar="PATH", required=True,
                   help="trace file to write")

    p = sub.add_parser("operator-info", parents=[common],
                       help="kernel dimension, basis, and sharp constants")
    p.add_argument("problem", help="problem file (JSON)")

    p = sub.add_parser("verify", parents=[common],
                       help="run the seeded property suites against the problem")
    p.add_argument("problem", help="problem file (JSON)")
    p.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    return parser


def _solve(spec: ProblemSpec):
    result = optimize_geodesic(spec.lindblad, spec.rho0, spec.rho1, spec.config)
    return result, (EXIT_OK if result.converged else EXIT_NOT_CONVERGED)


def _print_summary(report: dict) -> None:
    ham = report["hamiltonian"]
    print(f"distance     {report['distance']:.15g}")
    print(f"squared      {report['primal_cost']:.15g}")
    print(f"dual value   {report['dual_value']:.15g}")
    print(f"gap          {report['gap']:.3e}  (relative {report['rel_gap']:.3e})")
    print(f"iterations   {report['iterations']}  "
          f"converged: {'yes' if report['converged'] else 'NO'}")
    print(f"hamiltonian  mean {ham['mean']:.6g}  rel_std {ham['rel_std']:.3e}  "
          f"constant speed: {'yes' if ham['speed_ok'] else 'NO'}")
    if report["warnings"]:
        for w in report["warnings"]:
            print(f"warning      [{w['code']}] {w['message']}")
    else:
        print("warnings     none")


def run_distance(args) -> int:
    spec = load_problem(args.problem)
    result, code = _solve(spec)
    report = build_report(result, spec)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dump_canonical(report))
    if args.json:
        sys.stdout.write(dump_canonical(report))
    if not args.quiet and not args.json:
        _print_summary(report)
        if args.out:
            print(f"report       written to {args.out}")
    return code


def run_geodesic(args) -> int:
    spec = load_problem(args.problem)
    result, code = _solve(spec)
    export_geodesic(result, args.out)
    if args.json:
        sys.stdout.write(dump_canonical({
            "out": args.out,
            "distance": result.distance,
            "gap": result.gap,
            "converged": result.converged,
            "nodes": result.path.K + 1,
        }))
    if not args.quiet and not args.json:
        print(f"trace        {result.path.K + 1} nodes written to {args.out}")
        print(f"distance     {result.distance:.15g}")
        print(f"gap          {result.gap:.3e}")
        if not result.converged:
            print("converged    NO (best iterate exported)")
    return code


def run_operator_info(args) -> int:
    spec = load_problem(args.problem)
    l = spec.lindblad
    maximally_mixed = DensityMatrix(np.eye(l.n) / l.n)
    caught: list[str] = []
    with _warnings.catch_warnings(record=True) as rec:
        _warnings.simplefilter("always")
        p_mixed = poincare_constant(l, maximally_mixed)
        p_rho0 = poincare_constant(l, spec.rho0)
        caught = sorted({str(w.message) for w in rec
                         if issubclass(w.category, RuntimeWarning)})
    info = {
        "dimension": l.n,
        "operator_count": l.count,
        "kernel_dim": l.kernel_dim,
        "kernel_basis_norms": [b.norm() for b in l.kernel_basis],
        "poincare_maximally_mixed": p_mixed,
        "restricted_min_eig_rho0": p_rho0,
        "warnings": ([{"code": "kernel-dim",
                       "message": "kernel dimension exceeds 1; distances exist "
                                  "only between endpoints with equal kernel "
                                  "components"}] if l.kernel_dim > 1 else [])
                    + [{"code": "degenerate-weight", "message": m} for m in caught],
    }
    if args.json:
        sys.stdout.write(dump_canonical(info))
    if not args.quiet and not args.json:
        print(f"dimension         {info['dimension']}")
        print(f"operators         {info['operator_count']}")
        print(f"kernel dimension  {info['kernel_dim']}")
        norms = ", ".join(f"{v:.12g}" for v in info["kernel_basis_norms"])
        print(f"kernel basis norms [{norms}]")
        print(f"sharp constant at the maximally mixed state  "
              f"{info['poincare_maximally_mixed']:.12g}")
        print(f"restricted min eigenvalue at rho0            "
              f"{info['restricted_min_eig_rho0']:.12g}")
        for w in info["warnings"]:
            print(f"warning           [{w['code']}] {w['message']}")
    return EXIT_OK


def run_verify(args) -> int:
    spec = load_problem(args.problem)
    checks = run_suites(spec, args.suite)
    ok = all(c.passed for c in checks)
    if args.json:
        sys.stdout.write(dump_canonical({
            "suite": args.suite,
            "passed": ok,
            "checks": [c.as_dict() for c in checks],
        }))
    if not args.quiet and not args.json:
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'}  {c.name} — {c.detail}")
        n_ok = sum(c.passed for c in checks)
        print(f"{n_ok}/{len(checks)} checks passed (suite: {args.suite})")
    return EXIT_OK if ok else EXIT_ERROR


_HANDLERS = {
    "distance": run_distance,
    "geodesic": run_geodesic,
    "operator-info": run_operator_info,
    "verify": run_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; keep 2 reserved for infeasibility
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return _HANDLERS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except InfeasibleEndpoints as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
