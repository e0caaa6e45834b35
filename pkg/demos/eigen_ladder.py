"""Principal Dirichlet eigenvalue on [0, R] approaching its whole-line limit.

Run with ``python demos/eigen_ladder.py --N 1 --delta 0.25``.
"""
from __future__ import annotations

import argparse

from ksprofile import EigenProblem, principal_eigenvalue


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=1)
    ap.add_argument("--delta", type=float, default=0.25)
    args = ap.parse_args(argv)

    print(f"limit 2 N delta = {2 * args.N * args.delta:g}")
    print(f"{'R':>5} {'lambda':>20} {'lambda - limit':>14}")
    for R in (2.0, 5.0, 10.0, 20.0, 40.0):
        res = principal_eigenvalue(EigenProblem(args.N, args.delta, R))
        print(f"{R:5.0f} {res.lam:20.15f} {res.shift:14.3e}")


if __name__ == "__main__":
    main()
