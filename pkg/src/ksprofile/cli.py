"""Command-line front end.

Exit status is 0 on success, 2 when inputs fail validation and 3 when a
numerical procedure does not converge.  Default integrator controls may be
overridden through ``KSPROFILE_<FIELD>`` environment variables, for example
``KSPROFILE_REL_TOL=1e-12`` or ``KSPROFILE_R_MAX=60``.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import reports
from .asymptotics import fit_rate
from .errors import KSProfileError, NumericalError, ValidationError
from .model import ANY_KAPPA, ModelParams, classify_v, derive_kappa
from .ode import ProfileControls, integrate_profile
from .selfsim import (SelfSimilarSolution, algebraic_tail, fields_csv, gaussian_tail,
                      mass_report, pde_residual)
from .shooting import find_critical_lambda, solve
from .spectral import EigenProblem, ladder_csv, principal_eigenvalue
from .variational import GridControls, minimize_constrained

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _floats(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksprofile",
                                     description="Self-similar profiles of a chemotaxis-"
                                                 "consumption system.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, required=True, help="space dimension")
    common.add_argument("--alpha", type=float, default=None,
                        help="consumption exponent (required except by eigen and sweep)")
    common.add_argument("--Du", type=float, default=1.0)
    common.add_argument("--Dv", type=float, default=1.0)
    common.add_argument("--chi", type=float, default=1.0)
    common.add_argument("--kappa", type=float, default=None,
                        help="scaling exponent; only free (and required) for N=2, alpha=1")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("solve", parents=[common], help="integrate one profile")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)

    p = sub.add_parser("critical", parents=[common], help="bisect for the critical lambda")
    p.add_argument("--lo", type=float, default=0.01)
    p.add_argument("--hi", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--expand", action="store_true", help="grow the bracket automatically")

    sub.add_parser("classify", parents=[common], help="singularity class of v")

    p = sub.add_parser("eigen", parents=[common], help="principal eigenvalue ladder")
    p.add_argument("--delta", type=float, default=None, help="default 1/(4 Dv)")
    p.add_argument("--R", type=_floats, default=[5.0, 10.0, 20.0, 40.0],
                   help="comma-separated radii")

    p = sub.add_parser("variational", parents=[common], help="constrained energy minimizer")
    p.add_argument("--nodes", type=int, default=4000)
    p.add_argument("--R-cut", type=float, default=25.0)

    for name, text in (("reconstruct", "u and v on an x grid"), ("mass", "mass and L^p constants"),
                       ("residual", "finite-difference PDE residual")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--A", type=float, default=None)
        p.add_argument("--B", type=float, default=None)
        if name == "reconstruct":
            p.add_argument("--t", type=_floats, default=[1.0], help="comma-separated times")
            p.add_argument("--x-max", type=float, default=10.0)
            p.add_argument("--nx", type=int, default=101)
        if name == "residual":
            p.add_argument("--t", type=float, default=1.0)
            p.add_argument("--x-max", type=float, default=10.0)
            p.add_argument("--nx", type=int, default=41)
            p.add_argument("--h", type=float, default=1e-3)

    p = sub.add_parser("sweep", parents=[common], help="critical lambda over an alpha grid")
    p.add_argument("--alpha-grid", type=_floats, required=True,
                   help="comma-separated alpha values (--alpha is ignored)")
    p.add_argument("--chi-grid", type=_floats, default=None)
    p.add_argument("--lo", type=float, default=0.01)
    p.add_argument("--hi", type=float, default=100.0)
    p.add_argument("--workers", type=int, default=None)
    return parser


def _params(args) -> ModelParams:
    if args.alpha is None:
        raise ValidationError("--alpha is required")
    return ModelParams.create(args.N, args.Du, args.Dv, args.chi, args.alpha, args.kappa)


def _controls(args) -> ProfileControls:
    return ProfileControls.from_env(r_max=getattr(args, "r_max", None))


def _emit(text: str, args):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _amplitudes(args, params):
    """Resolve ``lambda``, ``A`` and ``B`` with ``lambda = A B^(alpha-1)`` enforced."""
    B = 1.0 if args.B is None else args.B
    if args.A is not None:
        lam = args.A * B ** (params.alpha - 1.0)
        if args.lam is not None and not math.isclose(lam, args.lam, rel_tol=1e-12):
            raise ValidationError(f"--lambda {args.lam} disagrees with A B^(alpha-1) = {lam}")
        return lam, args.A, B
    if args.lam is None:
        raise ValidationError("give --lambda or --A")
    return args.lam, args.lam / B ** (params.alpha - 1.0), B


def _self_similar(args, params):
    lam, A, B = _amplitudes(args, params)
    sol = solve(params, lam, _controls(args))
    tail = None
    if sol.is_global and params.kappa >= -params.N / 2.0:
        try:
            tail = algebraic_tail(sol)
        except KSProfileError:
            tail = None
    return SelfSimilarSolution(sol, A, B, tail)


def cmd_solve(args):
    params = _params(args)
    if args.lam is None:
        raise ValidationError("--lambda is required")
    sol = integrate_profile(params, args.lam, _controls(args))
    if (args.format or "csv") == "csv":
        return sol.to_csv()
    payload = {"lambda": sol.lam, "params": params.as_dict(),
               "outcome": {"kind": sol.outcome.kind.value, "radius": sol.outcome.radius,
                           "bounded": sol.outcome.bounded},
               "r_end": sol.r_end, "n_steps": sol.n_steps}
    return reports.dumps("solve", payload)


def cmd_critical(args):
    params = _params(args)
    res = find_critical_lambda(params, (args.lo, args.hi), args.tol, args.max_iter,
                               _controls(args), expand=args.expand)
    return reports.dumps("critical", res.report())


def cmd_classify(args):
    if args.alpha is None:
        raise ValidationError("--alpha is required")
    k = derive_kappa(args.N, args.alpha)
    cls = classify_v(args.N, args.alpha, args.kappa)
    kappa = args.kappa if k is ANY_KAPPA else k
    if args.format == "json":
        return reports.dumps("classify", {"N": args.N, "alpha": args.alpha, "kappa": kappa,
                                          "class": cls.tag.value})
    shown = "any" if kappa is None else f"{kappa:g}"
    return f"kappa={shown} {cls.tag.value}\n"


def cmd_eigen(args):
    if not args.Dv > 0:
        raise ValidationError("--Dv must be positive")
    delta = 1.0 / (4.0 * args.Dv) if args.delta is None else args.delta
    rows = [(R, principal_eigenvalue(EigenProblem(args.N, delta, R)).lam) for R in args.R]
    if (args.format or "csv") == "csv":
        return ladder_csv(rows)
    limit = 2.0 * args.N * delta
    payload = {"N": args.N, "delta": delta, "limit": limit,
               "ladder": [{"R": R, "lambda": lam} for R, lam in rows]}
    if args.delta is None:
        # with delta = 1/(4 Dv) the scaled limit is the regime edge -kappa = N/2
        payload.update(scaled_limit=limit * args.Dv, boundary_minus_kappa=args.N / 2.0)
    return reports.dumps("eigen", payload)


def cmd_variational(args):
    params = _params(args)
    state = minimize_constrained(params, GridControls(R_cut=args.R_cut, nodes=args.nodes))
    if args.format == "csv":
        return state.to_csv()
    return reports.dumps("variational", state.report())


def cmd_reconstruct(args):
    params = _params(args)
    sss = _self_similar(args, params)
    x = np.linspace(-args.x_max, args.x_max, args.nx) if params.N == 1 else \
        np.linspace(0.0, args.x_max, args.nx)
    return fields_csv(sss, args.t, x)


def cmd_mass(args):
    params = _params(args)
    sss = _self_similar(args, params)
    if params.kappa < -params.N / 2.0:
        crit = find_critical_lambda(params, (0.5 * sss.profile.lam, 2.0 * sss.profile.lam),
                                    controls=_controls(args), expand=True)
        lo, hi = crit.profiles
        sss = SelfSimilarSolution.from_profile(lo, sss.B, gaussian_tail(lo, hi))
    return reports.dumps("mass", mass_report(sss).report())


def cmd_residual(args):
    params = _params(args)
    sss = _self_similar(args, params)
    x = np.linspace(0.0, args.x_max, args.nx)
    res = pde_residual(sss, args.t, x, args.h)
    payload = {k: res[k] for k in ("max_relative", "u_equation", "v_equation")}
    payload.update(t=args.t, h=args.h)
    return reports.dumps("residual", payload)


SWEEP_FIELDS = ["alpha", "kappa", "class", "lambda_star", "M_star"]


def sweep_point(task):
    """One sweep row; failures leave the numeric fields empty."""
    N, alpha, chi, Du, Dv, kappa, lo, hi = task
    row = {"alpha": alpha, "chi": chi, "kappa": "", "class": "", "lambda_star": "",
           "M_star": ""}
    try:
        params = ModelParams.create(N, Du, Dv, chi, alpha, kappa)
    except ValidationError:
        try:
            row["class"] = classify_v(N, alpha, kappa).tag.value
        except ValidationError:
            pass
        return row
    row["kappa"] = params.kappa
    row["class"] = classify_v(N, alpha, params.kappa).tag.value
    try:
        crit = find_critical_lambda(params, (lo, hi), expand=True)
    except KSProfileError:
        return row
    row["lambda_star"] = crit.lambda_star
    try:
        if params.kappa >= -N / 2.0:
            # the near-critical endpoint sits outside the regime where the rate law holds,
            # so the plateau is read off the profile at half the critical value
            fit = fit_rate(solve(params, 0.5 * crit.lambda_star), lambda_star=crit.lambda_star)
            if fit.converged:
                row["M_star"] = fit.M_star
        else:
            row["M_star"] = minimize_constrained(params).M_star
    except KSProfileError:
        pass
    return row


def cmd_sweep(args):
    chis = args.chi_grid or [args.chi]
    tasks = [(args.N, a, c, args.Du, args.Dv, args.kappa, args.lo, args.hi)
             for c in chis for a in args.alpha_grid]
    workers = args.workers or min(len(tasks), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sweep_point, tasks))  # map keeps input order
    else:
        rows = [sweep_point(t) for t in tasks]
    fields = (["chi"] if args.chi_grid else []) + SWEEP_FIELDS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([f"{row[f]:.17g}" if isinstance(row[f], float) else row[f] for f in fields])
    return buf.getvalue()


COMMANDS = {
    "solve": cmd_solve, "critical": cmd_critical, "classify": cmd_classify,
    "eigen": cmd_eigen, "variational": cmd_variational, "reconstruct": cmd_reconstruct,
    "mass": cmd_mass, "sweep": cmd_sweep, "residual": cmd_residual,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _emit(COMMANDS[args.subcommand](args), args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())
