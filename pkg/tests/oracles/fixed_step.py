"""Fixed-step 8th-order Runge-Kutta oracle for the profile equation.

Independent of the package integrator: it uses the 12-stage 8th-order
Dormand-Prince tableau shipped with scipy at a constant step, vectorized
over many shooting parameters at once.  Run as a script to regenerate
``tests/data/oracle_goldens.json``.
"""
from __future__ import annotations

import json
import math
import pathlib
import sys

import numpy as np
from scipy.integrate._ivp import dop853_coefficients as dop

A = dop.A[:dop.N_STAGES, :dop.N_STAGES]
B = dop.B
C = dop.C[:dop.N_STAGES]

GOLDEN_PATH = pathlib.Path(__file__).resolve().parents[1] / "data" / "oracle_goldens.json"


def _rhs(r, phi, dphi, lam, N, Du, Dv, kappa, q):
    forcing = lam * np.sign(phi) * np.abs(phi) ** q * math.exp(-r * r / (4 * Du))
    return (kappa * phi - 0.5 * r * dphi + forcing) / Dv - (N - 1) / r * dphi


def shoot(lams, N, Du, Dv, chi, alpha, h=1e-4, r_end=30.0, blow=1e8, record=()):
    """Classify each lambda: +1 blow-up, -1 touch-zero, 0 reached ``r_end``.

    Returns ``(labels, recorded)`` where ``recorded[r]`` holds ``phi`` at
    the requested radii (nan once a trajectory stopped).
    """
    lams = np.asarray(lams, dtype=float)
    kappa = (1 - N / 2) / (1 - alpha)
    q = alpha + chi / Du
    c = (kappa + lams) / (N * Dv)
    r = h
    phi = 1 + 0.5 * c * r * r
    dphi = c * r
    label = np.zeros(lams.shape, dtype=int)
    alive = np.ones(lams.shape, dtype=bool)
    rec_idx = {int(round(rr / h)): rr for rr in record}
    recorded = {rr: np.full(lams.shape, np.nan) for rr in record}
    n = int(round((r_end - r) / h))
    ky = np.empty((dop.N_STAGES,) + lams.shape)
    kd = np.empty_like(ky)
    for step in range(n):
        for s in range(dop.N_STAGES):
            ys = phi + h * np.tensordot(A[s, :s], ky[:s], axes=1) if s else phi
            ds = dphi + h * np.tensordot(A[s, :s], kd[:s], axes=1) if s else dphi
            ky[s] = ds
            kd[s] = _rhs(r + C[s] * h, ys, ds, lams, N, Du, Dv, kappa, q)
        phi_new = phi + h * np.tensordot(B, ky, axes=1)
        dphi_new = dphi + h * np.tensordot(B, kd, axes=1)
        phi = np.where(alive, phi_new, phi)
        dphi = np.where(alive, dphi_new, dphi)
        r = h * (step + 2)
        up = alive & (phi > blow) & (dphi > 0)
        down = alive & (phi <= 0)
        label[up] = 1
        label[down] = -1
        alive &= ~(up | down)
        phi = np.where(alive, phi, 1.0)
        dphi = np.where(alive, dphi, 0.0)
        key = step + 2
        if key in rec_idx:
            recorded[rec_idx[key]] = np.where(alive, phi, np.nan)
        if not alive.any():
            break
    return label, recorded


def grid_bisect(lo, hi, N, Du, Dv, chi, alpha, rel=1e-4, k=64, h=1e-4, low_label=0):
    """Shrink a bracket by scanning ``k`` geometric points per pass.

    ``low_label`` is the oracle label expected at the low end: ``0`` for
    global (kappa >= -N/2) or ``-1`` for touch-zero (kappa < -N/2).
    """
    while hi / lo - 1 > rel:
        lams = np.geomspace(lo, hi, k)
        labels, _ = shoot(lams, N, Du, Dv, chi, alpha, h=h)
        low_side = labels == low_label
        i = int(np.argmin(low_side))  # first point leaving the low-side outcome
        lo, hi = lams[i - 1], lams[i]
        print(f"  bracket [{lo:.12g}, {hi:.12g}]", file=sys.stderr, flush=True)
    return lo, hi


def main(h=1e-4):
    out = {"step": h}
    lo, hi = grid_bisect(0.01, 100.0, 1, 1, 1, 1, 2.0, h=h)
    out["critical_N1_alpha2"] = {"lo": lo, "hi": hi, "lambda_star": 0.5 * (lo + hi)}
    lo, hi = grid_bisect(0.01, 1.5, 1, 1, 1, 1, 1.5, h=h, low_label=-1)
    out["critical_N1_alpha1.5"] = {"lo": lo, "hi": hi, "lambda_star": 0.5 * (lo + hi)}
    radii = (2.0, 10.0, 20.0, 29.0)
    labels, rec = shoot([0.05], 1, 1, 1, 1, 2.0, h=h, record=radii)
    out["global_N1_alpha2_lam0.05"] = {
        "label": int(labels[0]),
        "phi": {str(r): float(rec[r][0]) for r in radii},
        "tail_constant": float(rec[29.0][0] * 29.0),
    }
    GOLDEN_PATH.write_text(json.dumps(out, indent=2) + "\n")
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main(float(sys.argv[1]) if len(sys.argv) > 1 else 1e-4)
