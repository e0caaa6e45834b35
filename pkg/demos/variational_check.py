"""Minimize the constrained energy and compare against the shooting result.

Run with ``python demos/variational_check.py --alpha 1.5``.
"""
from __future__ import annotations

import argparse

from ksprofile import (GridControls, ModelParams, cross_check_with_shooting,
                       find_critical_lambda, minimize_constrained)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=1)
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--nodes", type=int, default=4000)
    args = ap.parse_args(argv)

    params = ModelParams.create(args.N, 1.0, 1.0, 1.0, args.alpha)
    state = minimize_constrained(params, GridControls(nodes=args.nodes))
    print(f"converged = {state.converged} after {len(state.J_history)} steps")
    print(f"J = {state.J_val:.10g}, H = {state.H_val:.10g}")
    print(f"M* = {state.M_star:.8g} (descent {state.M_descent:.8g}, energy {state.M_energy:.8g})")

    crit = find_critical_lambda(params, (0.01, 100.0))
    out = cross_check_with_shooting(state, params, crit.lambda_star)
    print(f"shooting lambda* = {crit.lambda_star:.10g}")
    print(f"variational lambda = {out['lambda_equiv']:.10g}, mismatch = {out['mismatch']:.2e}")


if __name__ == "__main__":
    main()
