"""Mass of the self-similar solution, its delta limit and the growth of v near 0.

Run with ``python demos/mass_and_singularity.py``.
"""
from __future__ import annotations

import argparse

import numpy as np

from ksprofile import (ModelParams, SelfSimilarSolution, delta_probe, fit_rate,
                       integrate_profile, mass, pde_residual, v_singularity_probe)
from ksprofile.selfsim import algebraic_tail


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--B", type=float, default=1.0)
    args = ap.parse_args(argv)

    params = ModelParams.create(1, 1.0, 1.0, 1.0, 2.0)
    prof = integrate_profile(params, args.lam)
    sss = SelfSimilarSolution.from_profile(prof, B=args.B, tail=algebraic_tail(prof))
    M = mass(sss)
    print(f"A = {sss.A:.6g}, B = {sss.B:.6g}, mass = {M:.10g}")

    print("u(., t) tested against exp(-|x|^2):")
    for row in delta_probe(sss):
        print(f"  t = {row['t']:.0e}  integral = {row['integral']:.8f}  error = {row['error']:.2e}")

    M_star = fit_rate(prof).M_star
    probe = v_singularity_probe(sss, epsilon=1.0, t_ladder=(1e-2, 1e-4, 1e-6))
    print(f"local integral of v on |x| < 1 (M* = {M_star:.4g}):")
    for t, val in zip(probe["t"], probe["local_integrals"]):
        print(f"  t = {t:.0e}  {val:.6f}")

    x = np.linspace(0.0, 10.0, 41)
    for h in (1e-3, 5e-4):
        res = pde_residual(sss, 1.0, x, h)["max_relative"]
        print(f"PDE residual with h = {h:g}: {res:.3e}")


if __name__ == "__main__":
    main()
