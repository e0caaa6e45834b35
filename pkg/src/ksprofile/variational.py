"""Constrained minimization of the profile energy in the very singular band.

With ``rho = r^(N-1) exp(r^2/(4 D_v))`` the energies are

    J(phi) = D_v/2 int rho phi'^2 dr + kappa/2 int rho phi^2 dr,
    H(phi) = 1/(q+1) int rho exp(-r^2/(4 D_u)) |phi|^(q+1) dr,

taken as plain integrals over the radial half-line; the sphere area is
never folded in.  A minimizer of ``J`` on ``{H = 1}`` solves

    -D_v (rho phi')' + kappa rho phi + M rho exp(-r^2/(4 D_u)) phi^q = 0

with a positive multiplier ``M``, and ``phi/phi(0)`` is then a profile with
``lam = M phi(0)^(q-1)``.

Everything is stored in the variable ``w = phi exp(r^2/(8 D_v))``, for which
``rho phi^2 = r^(N-1) w^2`` and

    rho phi'^2 = r^(N-1) (w' - r w / (4 D_v))^2,

so the weight ``rho`` itself is never formed.  Differences live on the
cell midpoints and the mass terms use the trapezoidal rule, which makes the
discrete gradient the exact transpose of the discrete energy.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .errors import (DegenerateDenominator, ExponentOutOfRange, NotConverged, ValidationError,
                     WrongRegime)
from .model import ModelParams, critical_q

BACKTRACK_LIMIT = 60


@dataclass(frozen=True)
class GridControls:
    R_cut: float = 25.0
    nodes: int = 4000
    grad_tol: float = 1e-7
    max_iter: int = 20000

    def __post_init__(self):
        if not self.R_cut > 0:
            raise ValidationError("R_cut must be positive")
        if self.nodes < 10:
            raise ValidationError("need at least 10 nodes")


def check_regime(params: ModelParams):
    """Reject parameters outside ``kappa < -N/2`` and ``1 < q < (N+2)/(N-2)_+``."""
    if not params.kappa < -params.N / 2.0:
        raise WrongRegime(f"need kappa < -N/2, got kappa = {params.kappa:g}")
    if not 1.0 < params.q < critical_q(params.N):
        raise ExponentOutOfRange(
            f"need 1 < q < {critical_q(params.N):g} for N = {params.N}, got q = {params.q:g}")


class Discretization:
    """Uniform grid on ``[0, R_cut]`` with ``w(R_cut) = 0``.

    The unknown vector holds ``w`` at every node except the last.
    """

    def __init__(self, params: ModelParams, controls: GridControls = GridControls()):
        self.params = params
        self.controls = controls
        p = params
        self.r = np.linspace(0.0, controls.R_cut, controls.nodes)
        self.h = self.r[1] - self.r[0]
        n = controls.nodes
        trap = np.full(n, self.h)
        trap[0] = trap[-1] = 0.5 * self.h
        self.mass = (trap * self.r ** (p.N - 1))[:-1]
        self.mid = 0.5 * (self.r[1:] + self.r[:-1])
        self.mid_w = self.h * self.mid ** (p.N - 1)
        self.shift = self.mid / (8.0 * p.D_v)
        self.E = np.exp(self.r[:-1] ** 2 * ((1.0 - p.q) / (8.0 * p.D_v) - 1.0 / (4.0 * p.D_u)))
        self._pre = self._preconditioner()

    # --- conversions -------------------------------------------------------
    def to_w(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return (phi * np.exp(self.r ** 2 / (8.0 * self.params.D_v)))[:-1]

    def to_phi(self, w) -> np.ndarray:
        full = np.append(w, 0.0)
        return full * np.exp(-self.r ** 2 / (8.0 * self.params.D_v))

    # --- energies ----------------------------------------------------------
    def _cell_slope(self, w):
        full = np.append(w, 0.0)
        a, b = full[:-1], full[1:]
        return (b - a) / self.h - self.shift * (a + b)

    def J(self, w) -> float:
        d = self._cell_slope(w)
        return (0.5 * self.params.D_v * float(np.dot(self.mid_w, d * d))
                + 0.5 * self.params.kappa * float(np.dot(self.mass, w * w)))

    def H(self, w) -> float:
        q = self.params.q
        return float(np.dot(self.mass * self.E, np.abs(w) ** (q + 1))) / (q + 1)

    def grad_J(self, w) -> np.ndarray:
        d = self._cell_slope(w) * self.mid_w * self.params.D_v
        g = self.params.kappa * self.mass * w
        g += d[:len(w)] * (-1.0 / self.h - self.shift[:len(w)])
        g[1:] += d[:len(w) - 1] * (1.0 / self.h - self.shift[:len(w) - 1])
        return g

    def grad_H(self, w) -> np.ndarray:
        q = self.params.q
        return self.mass * self.E * np.abs(w) ** q * np.sign(w)

    # --- Sobolev preconditioner ---------------------------------------------
    def _preconditioner(self):
        """Banded form of ``D_v K + M`` (kinetic part of ``J`` plus the mass)."""
        m = len(self.mass)
        c = self.params.D_v * self.mid_w
        a = -1.0 / self.h - self.shift      # d(slope)/d(left node)
        b = 1.0 / self.h - self.shift       # d(slope)/d(right node)
        diag = self.mass.copy()
        diag += (c * a * a)[:m]
        diag[1:] += (c * b * b)[:m - 1]
        off = (c * a * b)[:m - 1]
        ab = np.zeros((2, m))
        ab[0, 1:] = off
        ab[1] = diag
        return ab

    def precondition(self, g) -> np.ndarray:
        return solveh_banded(self._pre, g)

    def normalize(self, w) -> np.ndarray:
        """Nonnegative representative of ``w`` on ``{H = 1}``."""
        w = np.abs(w)
        H = self.H(w)
        if not H > 0:
            raise DegenerateDenominator("cannot normalize the zero function")
        return w / H ** (1.0 / (self.params.q + 1.0))

    # --- strong-form residual ---------------------------------------------
    def el_residual(self, w, M) -> float:
        """Max-norm defect of the Euler-Lagrange equation written for ``w``.

        Uses plain centered differences, independent of the energy
        discretization, so the defect measures truncation error.  At the
        origin the even extension of ``w`` is used.
        """
        p = self.params
        s = 1.0 / (8.0 * p.D_v)
        full = np.append(w, 0.0)
        r, h = self.r, self.h
        lap = np.empty(len(full) - 1)
        lap[1:] = ((full[2:] - 2 * full[1:-1] + full[:-2]) / h ** 2
                   + (p.N - 1) / r[1:-1] * (full[2:] - full[:-2]) / (2 * h))
        lap[0] = p.N * 2.0 * (full[1] - full[0]) / h ** 2
        res = (p.D_v * (lap - (4 * s * s * r[:-1] ** 2 + 2 * s * p.N) * w)
               - p.kappa * w - M * self.E * np.abs(w) ** p.q)
        return float(np.max(np.abs(res)))


def energy(phi, params: ModelParams, grid_controls: GridControls = GridControls()):
    """``(J, H)`` of a grid function sampled on the default uniform grid.

    ``phi`` must have ``grid_controls.nodes`` values on ``[0, R_cut]``; the
    last value is ignored (the boundary value is zero).
    """
    check_regime(params)
    disc = Discretization(params, grid_controls)
    phi = np.asarray(phi, dtype=float)
    if phi.shape != disc.r.shape:
        raise ValidationError(f"phi must have {disc.r.size} samples, got {phi.shape}")
    w = disc.to_w(phi)
    return disc.J(w), disc.H(w)


@dataclass(frozen=True)
class VariationalState:
    grid: np.ndarray
    phi_star: np.ndarray
    J_val: float
    H_val: float
    M_star: float
    el_residual: float
    params: ModelParams
    controls: GridControls
    M_descent: float = math.nan
    M_energy: float = math.nan
    grad_norm: float = math.nan
    iterations: int = 0
    converged: bool = True
    J_history: tuple = field(default=(), repr=False)

    def report(self) -> dict:
        return {"J": self.J_val, "H": self.H_val, "M_star": self.M_star,
                "el_residual": self.el_residual, "R_cut": self.controls.R_cut,
                "nodes": self.controls.nodes}

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2, sort_keys=True)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["r", "phi"])
        for r, v in zip(self.grid, self.phi_star):
            wr.writerow([f"{r:.17g}", f"{v:.17g}"])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _multiplier(gJ, gH, pH):
    # P-inner-product projection of grad J onto grad H
    return float(np.dot(gJ, pH) / np.dot(gH, pH))


def minimize_constrained(params: ModelParams, grid_controls: GridControls = GridControls(),
                         initial=None) -> VariationalState:
    """Minimize ``J`` on ``{H = 1}`` by preconditioned projected gradient descent.

    Each step moves along the Sobolev gradient of ``J`` projected onto the
    tangent space of the constraint, replaces the iterate by its modulus and
    rescales it back onto ``{H = 1}``.  The step is halved until ``J``
    decreases.  Convergence is declared when the preconditioned norm of the
    projected gradient, relative to that of ``grad J``, falls below
    ``grid_controls.grad_tol``.

    Raises
    ------
    NotConverged
        With the last iterate in ``state`` when ``max_iter`` is exhausted or
        the line search stalls above the gradient tolerance.
    """
    check_regime(params)
    c = grid_controls
    disc = Discretization(params, c)
    if initial is None:
        w = np.exp(-disc.r[:-1] ** 2 / (8.0 * params.D_v))
    else:
        w = disc.to_w(initial)
    w = disc.normalize(w)
    J = disc.J(w)
    history = [J]
    tau = 1.0
    grad_norm = math.inf
    mu = math.nan
    it = 0
    converged = False
    while it < c.max_iter:
        gJ, gH = disc.grad_J(w), disc.grad_H(w)
        pJ, pH = disc.precondition(gJ), disc.precondition(gH)
        mu = _multiplier(gJ, gH, pH)
        direction = pJ - mu * pH
        grad_norm = math.sqrt(max(np.dot(gJ - mu * gH, direction), 0.0)
                              / max(np.dot(gJ, pJ), 1e-300))
        if grad_norm < c.grad_tol:
            converged = True
            break
        for _ in range(BACKTRACK_LIMIT):
            trial = disc.normalize(w - tau * direction)
            J_trial = disc.J(trial)
            if J_trial < J:
                break
            tau *= 0.5
        else:
            break
        w, J = trial, J_trial
        history.append(J)
        tau = min(2.0 * tau, 1.0)
        it += 1
    state = _build_state(disc, w, -mu, grad_norm, it, converged, history)
    if not converged:
        raise NotConverged(
            f"projected gradient norm {grad_norm:.3e} after {it} iterations", state=state)
    return state


def _build_state(disc, w, M_descent, grad_norm, it, converged, history):
    p = disc.params
    J, H = disc.J(w), disc.H(w)
    phi = disc.to_phi(w)
    provisional = VariationalState(
        grid=disc.r, phi_star=phi, J_val=J, H_val=H, M_star=M_descent, el_residual=math.nan,
        params=p, controls=disc.controls, M_descent=M_descent,
        M_energy=-2.0 * J / (p.q + 1.0), grad_norm=grad_norm, iterations=it,
        converged=converged, J_history=tuple(history))
    try:
        M = multiplier_from_eigenfunction(provisional, p)
    except DegenerateDenominator:
        M = M_descent
    res = disc.el_residual(w, M)
    return VariationalState(
        grid=disc.r, phi_star=phi, J_val=J, H_val=H, M_star=M, el_residual=res, params=p,
        controls=disc.controls, M_descent=M_descent, M_energy=-2.0 * J / (p.q + 1.0),
        grad_norm=grad_norm, iterations=it, converged=converged, J_history=tuple(history))


def multiplier_from_eigenfunction(state: VariationalState, params: ModelParams) -> float:
    """Multiplier obtained by testing the equation against ``exp(-r^2/(4 D_v))``.

    Since that Gaussian is the half-line principal eigenfunction with
    eigenvalue ``N/(2 D_v)``, the kinetic term collapses and

        M = -(N/2 + kappa) int rho phi phi0 / int rho exp(-r^2/(4 D_u)) phi^q phi0.

    Raises
    ------
    DegenerateDenominator
        If the denominator vanishes or underflows.
    """
    check_regime(params)
    p = params
    r = np.asarray(state.grid, dtype=float)
    phi = np.asarray(state.phi_star, dtype=float)
    w = phi * np.exp(r ** 2 / (8.0 * p.D_v))
    rn = r ** (p.N - 1)
    num = np.trapezoid(rn * w * np.exp(-r ** 2 / (8.0 * p.D_v)), r)
    den = np.trapezoid(rn * np.abs(w) ** p.q
                       * np.exp(-r ** 2 * (p.q / (8.0 * p.D_v) + 1.0 / (4.0 * p.D_u))), r)
    if not (den > 1e-300 and math.isfinite(den)):
        raise DegenerateDenominator(f"q-weighted integral is {den!r}")
    return float(-(p.N / 2.0 + p.kappa) * num / den)


def cross_check_with_shooting(state: VariationalState, params: ModelParams,
                              lambda_star: float) -> dict:
    """Convert the multiplier into a shooting parameter and compare."""
    check_regime(params)
    lam = state.M_star * state.phi_star[0] ** (params.q - 1.0)
    return {"lambda_equiv": float(lam),
            "mismatch": float(abs(lam - lambda_star) / lambda_star)}


def state_from_profile(phi, lam: float, params: ModelParams,
                       grid_controls: GridControls = GridControls()) -> VariationalState:
    """Rescale a profile (``phi(0) = 1``) onto ``{H = 1}`` and attach the implied multiplier.

    ``phi`` is a callable or an array on the default grid.  Useful as an
    exact fixture: the cross check of the result returns ``lam``.
    """
    check_regime(params)
    disc = Discretization(params, grid_controls)
    values = phi(disc.r) if callable(phi) else np.asarray(phi, dtype=float)
    values = np.nan_to_num(values, nan=0.0)
    w = disc.to_w(values)
    scale = disc.H(w) ** (-1.0 / (params.q + 1.0))
    w = w * scale
    M = lam / scale ** (params.q - 1.0)
    return VariationalState(grid=disc.r, phi_star=disc.to_phi(w), J_val=disc.J(w),
                            H_val=disc.H(w), M_star=M, el_residual=disc.el_residual(w, M),
                            params=params, controls=grid_controls)
