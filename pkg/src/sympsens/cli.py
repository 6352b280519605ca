"""Command-line front end.

Exit codes: 0 success, 2 unreadable input or bad arguments, 3 matrix not
positive definite, 4 residual or suite tolerance exceeded, 5 finite
difference check failed.
"""

from __future__ import annotations

import argparse
import shlex
import sys

import numpy as np

from .core import PD_TOL, ConvergenceError, NotPositiveDefiniteError, SympsensError, condition_number
from .harness import SpectrumSpec, fd_directional_derivative, nonconvexity_example, pd_with_spectrum
from .reports import MatrixFormatError, Report, digest, load_matrix, save_matrix
from .sensitivity import CLUSTER_TOL, derivative_report, multiplicity_indices, sigma_m
from .subdifferential import clarke_extreme_points, clarke_mp_dderiv
from .suites import SUITES, run_suite
from .williamson import (diagonal_residual, half_dim, symplectic_eigenvalues, verify_symplectic,
                         williamson)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_PD = 3
EXIT_RESIDUAL = 4
EXIT_FD = 5

FD_MISMATCH_TOL = 1e-4
KAPPA_WARN = 1e8
ASYMMETRY_WARN = 1e-12


class UsageError(SympsensError):
    """Arguments are individually valid but inconsistent."""


def _load(path, report: Report, label: str):
    loaded = load_matrix(path)
    report.tolerances["pd"] = PD_TOL
    report.residuals[f"asymmetry_{label}"] = loaded.asymmetry
    scale = max(1.0, float(np.max(np.abs(loaded.raw))))
    if loaded.asymmetry > ASYMMETRY_WARN * scale:
        report.warnings.append(f"{label} is not symmetric (max |a_ij - a_ji| = {loaded.asymmetry:.3g}); "
                               "using (A + A^T)/2")
    return loaded.matrix


def _warn_conditioning(a, report: Report) -> None:
    kappa = condition_number(a)
    report.payload["kappa"] = kappa
    if kappa > KAPPA_WARN:
        report.warnings.append(f"ill-conditioned input: kappa = {kappa:.3g}; "
                               "residuals may be large")


def _flag_multiplicity(idx, report: Report) -> None:
    report.payload["i_m"] = idx.i_m
    report.payload["j_m"] = idx.j_m
    report.flags["ill_conditioned_multiplicity"] = idx.ill_conditioned
    if idx.ill_conditioned:
        report.warnings.append("ill-conditioned multiplicity: a neighbouring symplectic eigenvalue "
                               "is within 10x the clustering threshold")


def cmd_spectrum(args, report: Report) -> int:
    a = _load(args.matrix, report, "A")
    report.digest = digest(a)
    report.payload["d"] = symplectic_eigenvalues(a)
    return EXIT_OK


def cmd_decompose(args, report: Report) -> int:
    a = _load(args.matrix, report, "A")
    report.digest = digest(a)
    report.tolerances["residual"] = args.tol
    _warn_conditioning(a, report)
    w = williamson(a, check=False)
    sym = verify_symplectic(w.M).residual
    diag_rel = diagonal_residual(a, w) / float(np.linalg.norm(a))
    report.payload["d"] = w.d
    report.payload["M"] = w.M
    report.residuals["symplectic"] = sym
    report.residuals["diagonal_relative"] = diag_rel
    ok = sym <= args.tol and diag_rel <= args.tol
    report.flags["residuals_within_tol"] = ok
    return EXIT_OK if ok else EXIT_RESIDUAL


def cmd_dderiv(args, report: Report) -> int:
    a = _load(args.a, report, "A")
    b = _load(args.b, report, "B")
    report.digest = digest(a, b)
    if a.shape != b.shape:
        raise UsageError(f"A is {a.shape[0]}x{a.shape[0]} but B is {b.shape[0]}x{b.shape[0]}")
    n = half_dim(a)
    which = "sigma" if args.which in ("sigma", "σ") else "d"
    lo = 0 if which == "sigma" else 1
    if not lo <= args.m <= n:
        raise UsageError(f"--m must lie in {lo}..{n}, got {args.m}")
    report.tolerances["cluster"] = args.cluster_tol
    if args.m == 0:
        value = 0.0
    else:
        rep = derivative_report(a, b, args.m, which, cluster_tol=args.cluster_tol)
        value = rep.value
        _flag_multiplicity(rep.idx, report)
        report.residuals["symplectic"] = rep.symplectic_residual
        report.residuals["diagonal"] = rep.diagonal_residual
    report.payload["value"] = value
    if not args.fd_check:
        return EXIT_OK
    m = args.m
    if which == "d":
        f = lambda x: symplectic_eigenvalues(x)[m - 1]  # noqa: E731
    else:
        f = lambda x: sigma_m(x, m)  # noqa: E731
    fd = fd_directional_derivative(f, a, b)
    discrepancy = abs(fd.estimate - value)
    report.payload["fd_estimate"] = fd.estimate
    report.payload["fd_step"] = fd.step_used
    report.residuals["fd_error_estimate"] = fd.error_estimate
    report.residuals["fd_discrepancy"] = discrepancy
    report.tolerances["fd_mismatch"] = FD_MISMATCH_TOL
    ok = discrepancy <= FD_MISMATCH_TOL
    report.flags["fd_agrees"] = ok
    return EXIT_OK if ok else EXIT_FD


def cmd_subdiff(args, report: Report) -> int:
    a = _load(args.matrix, report, "A")
    inputs = [a]
    b = None
    if args.direction is not None:
        b = _load(args.direction, report, "B")
        if b.shape != a.shape:
            raise UsageError("direction must have the same shape as A")
        inputs.append(b)
    report.digest = digest(*inputs)
    n = half_dim(a)
    if not 1 <= args.m <= n:
        raise UsageError(f"--m must lie in 1..{n}, got {args.m}")
    if args.count < 0:
        raise UsageError(f"--count must be non-negative, got {args.count}")
    report.tolerances["cluster"] = args.cluster_tol
    w = williamson(a, check=False)
    report.residuals["symplectic"] = verify_symplectic(w.M).residual
    idx = multiplicity_indices(w.d, args.m, args.cluster_tol)
    _flag_multiplicity(idx, report)
    sample = clarke_extreme_points(w, args.m, args.count, args.seed, direction=b,
                                   cluster_tol=args.cluster_tol)
    if b is None:
        for k, g in enumerate(sample.elements, start=1):
            report.payload[f"extreme_point_{k}"] = g
        return EXIT_OK
    exact = clarke_mp_dderiv(a, b, args.m, frame=w, cluster_tol=args.cluster_tol)
    report.payload["support"] = exact
    if args.count > 0:
        inner = np.array([float(np.sum(g * b)) for g in sample.elements[:sample.optimal]])
        sampled = sample.support(b)
        report.payload["inner_products"] = inner
        report.payload["sampled_max"] = sampled
        report.payload["gap"] = exact - sampled
    return EXIT_OK


def cmd_verify(args, report: Report) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    report.digest = digest(extra=f"{args.suite}|{args.trials}|{args.seed}|{args.n}")
    ok = True
    for name in names:
        res = run_suite(name, args.trials, seed=args.seed, n=args.n)
        report.payload[f"{name}.passed"] = res.passed
        report.payload[f"{name}.total"] = res.total
        for check, value in sorted(res.worst.items()):
            report.residuals[f"{name}.{check}"] = value
        report.flags[name] = res.ok
        report.warnings += [f"{name}: {msg}" for msg in res.failures]
        ok &= res.ok
        if name == "example1":
            ex = nonconvexity_example()
            report.payload["example1.midpoint_offdiagonal"] = ex.phi_midpoint[0, 1].imag
            report.payload["example1.gap_eigenvalues"] = ex.gap_eigenvalues
            report.payload["example1.verdict"] = ex.verdict
    return EXIT_OK if ok else EXIT_RESIDUAL


def _parse_spectrum(text: str) -> tuple:
    try:
        d = tuple(float(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad spectrum {text!r}: {exc}") from exc
    if not d or not all(x > 0 and np.isfinite(x) for x in d):
        raise argparse.ArgumentTypeError(f"spectrum must be non-empty and positive, got {text!r}")
    return d


def cmd_gen(args, report: Report) -> int:
    a, _ = pd_with_spectrum(SpectrumSpec(args.spectrum, seed=args.seed, spread=args.spread))
    save_matrix(args.output, a, args.matrix_format)
    report.digest = digest(a)
    report.payload["path"] = str(args.output)
    report.payload["d"] = np.array(args.spectrum)
    report.payload["spread"] = args.spread
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")

    parser = argparse.ArgumentParser(
        prog="sympsens", description="Symplectic eigenvalues, Williamson frames and their sensitivity.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="ascending symplectic eigenvalues")
    p.add_argument("matrix")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("decompose", parents=[common], help="Williamson decomposition with residuals")
    p.add_argument("matrix")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="bound on the symplectic and relative diagonal residuals (default 1e-8)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("dderiv", parents=[common], help="directional derivative of d_m or sigma_m")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--which", choices=("d", "sigma", "σ"), default="d")
    p.add_argument("--fd-check", action="store_true", help="compare with a finite-difference estimate")
    p.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL)
    p.set_defaults(func=cmd_dderiv)

    p = sub.add_parser("subdiff", parents=[common], help="Clarke extreme points of -d_m")
    p.add_argument("matrix")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--direction", default=None, help="matrix file B for support values")
    p.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL)
    p.set_defaults(func=cmd_subdiff)

    p = sub.add_parser("verify", parents=[common], help="run randomised verification suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--trials", type=int, default=None, help="trials per suite (default: suite size)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None, help="fix the half dimension n")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", parents=[common], help="write a PD matrix with a given symplectic spectrum")
    p.add_argument("--spectrum", type=_parse_spectrum, required=True, help="comma-separated d_1,...,d_n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spread", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--matrix-format", choices=("plain", "json"), default="plain")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad arguments
    for name in ("trials", "n"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            parser.error(f"--{name} must be positive")
    if getattr(args, "spread", 0.0) < 0:
        parser.error("--spread must be non-negative")
    report = Report(command=shlex.join(["sympsens", *argv]), seed=getattr(args, "seed", None))
    try:
        code = args.func(args, report)
    except (MatrixFormatError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotPositiveDefiniteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_PD
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    except SympsensError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESIDUAL
    sys.stdout.write(report.emit(args.json))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return code


def main_exit() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
