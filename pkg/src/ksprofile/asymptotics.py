"""Far-field diagnostics of integrated profiles.

Global profiles behave like ``M* r^(2 kappa)`` at large r; :func:`fit_rate`
estimates ``M*`` from the plateau of ``g(r) = phi(r) r^(-2 kappa)``.
Connecting profiles in the very singular band decay faster than
``rho^(-1/2)`` with ``rho = r^(N-1) exp(r^2/(4 D_v))``; that is what
:func:`weighted_decay_check` looks at.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotGlobal
from .ode import OutcomeKind, ProfileSolution

PLATEAU_THRESHOLD = 1e-2
WINDOW = (0.6, 0.9)
MIN_WINDOW_RATIO = 1.5


@dataclass(frozen=True)
class AsymptoticFit:
    M_star: float
    window: tuple[float, float]
    plateau_defect: float
    converged: bool
    C1: float = math.nan
    C2: float = math.nan
    sign_changes: int = 0
    #: set when lambda is close to its critical value, where the rate law is unproven
    outside_proven_regime: bool = False

    def report(self) -> dict:
        return {"M_star": self.M_star, "window": list(self.window),
                "plateau_defect": self.plateau_defect, "converged": self.converged}


def _window_mask(grid, r_end, window):
    ra, rb = window[0] * r_end, window[1] * r_end
    mask = (grid >= ra) & (grid <= rb)
    return mask, (ra, rb)


def fit_rate(sol: ProfileSolution, window=WINDOW, threshold: float = PLATEAU_THRESHOLD,
             lambda_star: float | None = None) -> AsymptoticFit:
    """Plateau fit of ``g = phi r^(-2 kappa)`` over ``window`` (fractions of ``r_end``).

    ``M_star`` is the geometric mean of ``g`` on the window and
    ``plateau_defect = max |g/M_star - 1|``.  When ``lambda_star`` is given
    and ``sol.lam`` exceeds half of it the fit is flagged as lying outside
    the small-parameter regime in which the rate law is known to hold.

    Raises
    ------
    NotGlobal
        If the profile did not reach ``r_max``.
    """
    if sol.outcome.kind is not OutcomeKind.GLOBAL:
        raise NotGlobal(f"rate fit needs a global profile, got {sol.outcome}")
    mask, (ra, rb) = _window_mask(sol.grid, sol.r_end, window)
    if mask.sum() < 2:
        raise NotGlobal("fewer than two grid nodes in the fit window")
    r = sol.grid[mask]
    eta = 2.0 * sol.params.kappa
    log_g = np.log(sol.phi[mask]) - eta * np.log(r)
    M = float(np.exp(log_g.mean()))
    g = np.exp(log_g)
    defect = float(np.max(np.abs(g / M - 1.0)))
    dg = sol.dphi[mask] - eta * sol.phi[mask] / r
    signs = np.sign(dg[dg != 0])
    changes = int(np.count_nonzero(np.diff(signs)))
    converged = defect < threshold and rb / ra >= MIN_WINDOW_RATIO
    outside = lambda_star is not None and sol.lam > 0.5 * lambda_star
    return AsymptoticFit(M_star=M, window=(ra, rb), plateau_defect=defect,
                         converged=bool(converged), C1=float(g.min()), C2=float(g.max()),
                         sign_changes=changes, outside_proven_regime=outside)


def weighted_metric(r, phi, N: int, D_v: float) -> np.ndarray:
    """``log(phi sqrt(rho))`` evaluated without forming ``rho``."""
    r = np.asarray(r, dtype=float)
    return np.log(np.asarray(phi, dtype=float)) + 0.5 * (N - 1) * np.log(r) + r * r / (8.0 * D_v)


@dataclass(frozen=True)
class DecayCheck:
    radii: np.ndarray
    metric: np.ndarray
    monotone_decreasing: bool

    def report(self) -> dict:
        return {"metric": self.metric.tolist(), "monotone_decreasing": self.monotone_decreasing}


def weighted_decay_check(sol: ProfileSolution, window=WINDOW) -> DecayCheck:
    """Check that ``phi sqrt(rho)`` decreases on the trailing window.

    The window is taken relative to the last positive node, so a
    near-critical trajectory that eventually touches zero is judged on the
    segment before it departs from the connecting profile.
    """
    pos = sol.phi > 0
    grid, phi = sol.grid[pos], sol.phi[pos]
    mask, _ = _window_mask(grid, grid[-1], window)
    r = grid[mask]
    m = weighted_metric(r, phi[mask], sol.params.N, sol.params.D_v)
    return DecayCheck(radii=r, metric=m, monotone_decreasing=bool(np.all(np.diff(m) < 0)))
