"""Profile initial-value problem and its transformed views.

The reduced profile equation for ``phi = psi/B`` reads

    D_v (phi'' + (N-1)/r phi') = kappa phi - r/2 phi' + lam phi^q exp(-r^2/(4 D_u)),
    phi(0) = 1, phi'(0) = 0,

with ``lam = A B^(alpha-1)`` and ``q = alpha + chi/D_u``.  Only this explicit
form is integrated; the weighted divergence form overflows for moderate r.

Trajectories end in one of three ways: they exist up to ``r_max`` (global),
escape to infinity at a finite radius (blow-up) or reach zero at a finite
radius (touch-zero).
"""
from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, StepUnderflow, TransformUndefined
from .integrators import Stepper, hermite_root, rk_step
from .model import ModelParams

#: exponents below this are flushed to zero
LOG_UNDERFLOW = -700.0
LOG_MAX = 700.0
ENV_PREFIX = "KSPROFILE_"


class OutcomeKind(str, enum.Enum):
    GLOBAL = "global"
    BLOW_UP = "blow_up"
    TOUCH_ZERO = "touch_zero"


@dataclass(frozen=True)
class Outcome:
    """Trajectory fate.  ``radius`` is ``r_max`` for global runs and the
    estimated singular radius otherwise."""

    kind: OutcomeKind
    radius: float
    bounded: bool = True

    def __str__(self):
        return f"{self.kind.value}({self.radius:.6g})"


@dataclass(frozen=True)
class ProfileControls:
    r_max: float = 40.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-60
    phi_ceiling: float = 1e10
    phi_floor: float = 1e-40
    r0: float = 2e-4
    step_cap: float = 0.01
    escape_margin: float = 1e6

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if not (self.phi_ceiling > 1.0 > self.phi_floor > 0.0):
            raise ValueError("need phi_ceiling > 1 > phi_floor > 0")
        if not (0 < self.r0 < self.r_max):
            raise ValueError("need 0 < r0 < r_max")
        if not (self.rel_tol > 0 and self.abs_tol >= 0):
            raise ValueError("tolerances must be positive")

    def tightened(self, factor: float = 10.0) -> "ProfileControls":
        return replace(self, rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)

    @classmethod
    def from_env(cls, environ=None, **overrides) -> "ProfileControls":
        """Defaults overridable by ``KSPROFILE_<FIELD>`` environment variables."""
        environ = os.environ if environ is None else environ
        values = {}
        for f in fields(cls):
            key = ENV_PREFIX + f.name.upper()
            if key in environ:
                values[f.name] = float(environ[key])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def log_gaussian(r: float, D_u: float) -> float:
    return -r * r / (4.0 * D_u)


def gaussian(r, D_u):
    """``exp(-r^2/(4 D_u))`` flushed to zero below ``exp(-700)``."""
    e = -np.square(r) / (4.0 * D_u)
    return np.where(e < LOG_UNDERFLOW, 0.0, np.exp(np.maximum(e, LOG_UNDERFLOW)))


def rhs(r: float, phi: float, dphi: float, params: ModelParams, lam: float) -> float:
    """Second derivative ``phi''`` from the explicit form of the profile equation."""
    if not phi > 0:
        raise DomainError(f"phi must be positive, got {phi!r}")
    if not r > 0:
        raise DomainError("rhs is singular at r = 0; use taylor_start")
    p = params
    e = log_gaussian(r, p.D_u)
    forcing = 0.0 if (lam == 0 or e < LOG_UNDERFLOW) else lam * phi ** p.q * math.exp(e)
    return (p.kappa * phi - 0.5 * r * dphi + forcing) / p.D_v - (p.N - 1) / r * dphi


def origin_curvature(params: ModelParams, lam: float) -> float:
    """``phi''(0) = (kappa + lam)/(N D_v)``, the L'Hopital limit at the origin."""
    return (params.kappa + lam) / (params.N * params.D_v)


@dataclass(frozen=True)
class TaylorStart:
    phi: float
    dphi: float
    error_bound: float

    def __iter__(self):
        return iter((self.phi, self.dphi))


def taylor_start(params: ModelParams, lam: float, r0: float) -> TaylorStart:
    """Quartic Taylor data at ``r0``.

    ``error_bound`` is the order of the neglected sextic term, estimated as
    ``|b| r0^6`` from the quartic coefficient ``b``.
    """
    p = params
    c = origin_curvature(p, lam)
    a = 0.5 * c
    b = (a * (p.kappa - 1.0 + lam * p.q) - lam / (4.0 * p.D_u)) / (4.0 * (p.N + 2) * p.D_v)
    return TaylorStart(1.0 + a * r0 ** 2 + b * r0 ** 4, 2.0 * a * r0 + 4.0 * b * r0 ** 3,
                       abs(b) * r0 ** 6)


def _linear_rhs(params: ModelParams, lam: float):
    kappa, Dv, Du, q, Nm1 = params.kappa, params.D_v, params.D_u, params.q, params.N - 1

    def f(r, y):
        phi, dphi = y
        e = -r * r / (4.0 * Du)
        if lam == 0 or e < LOG_UNDERFLOW or phi == 0:
            forcing = 0.0
        else:
            # sign-extended power keeps trial stages past a zero finite
            forcing = lam * math.copysign(abs(phi) ** q, phi) * math.exp(e)
        return np.array([dphi, (kappa * phi - 0.5 * r * dphi + forcing) / Dv - Nm1 / r * dphi])

    return f


def _log_forcing(params, lam, r, ell):
    """``G = lam phi^(q-1) exp(-r^2/(4 D_u))`` from ``ell = ln phi``."""
    if lam == 0:
        return 0.0
    e = math.log(lam) + (params.q - 1.0) * ell - r * r / (4.0 * params.D_u)
    if e < LOG_UNDERFLOW:
        return 0.0
    return math.exp(min(e, LOG_MAX))


def _log_rhs(params: ModelParams, lam: float):
    kappa, Dv, Nm1 = params.kappa, params.D_v, params.N - 1

    def f(r, y):
        ell, w = y
        G = _log_forcing(params, lam, r, ell)
        return np.array([w, (kappa - 0.5 * r * w + G) / Dv - Nm1 / r * w - w * w])

    return f


def blowup_distance(w: float, G: float, q: float, D_v: float) -> float:
    """Distance to the singularity for ``phi'' = (G/D_v) phi (phi/phi0)^(q-1)``.

    Energy integration of the pure power law starting from slope ``w phi``
    gives ``int_1^inf ds / sqrt(w^2 + b (s^(q+1) - 1))`` with
    ``b = 2 G / ((q+1) D_v)``.
    """
    b = 2.0 * G / ((q + 1.0) * D_v)
    val, _ = quad(lambda s: 1.0 / math.sqrt(w * w + b * (s ** (q + 1.0) - 1.0)), 1.0, math.inf,
                  limit=200)
    return val


def _escape_confirmed(params, lam, r, ell, w, margin):
    """Superlinear escape test on the log-variable state.

    Requires the forcing coefficient ``G`` to exceed the linear coefficients
    by ``margin`` and the convexity bound ``phi'' >= lam e^{-r^2/4D_u} phi^q/(2 D_v)``.
    """
    if w <= 0:
        return False, 0.0
    G = _log_forcing(params, lam, r, ell)
    linear_scale = 1.0 + abs(params.kappa) + r * r / params.D_v
    if G < margin * linear_scale:
        return False, G
    convex = G / 2.0 >= -params.kappa + (0.5 * r + params.D_v * (params.N - 1) / r) * w
    return convex, G


@dataclass(frozen=True, eq=False)
class ProfileSolution:
    """Integrated profile on an adaptive grid.

    ``grid``, ``phi`` and ``dphi`` exclude the origin; ``phi(0) = 1`` and
    ``phi'(0) = 0`` by construction.
    """

    lam: float
    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    outcome: Outcome
    params: ModelParams
    controls: ProfileControls = field(default_factory=ProfileControls)
    taylor_error: float = 0.0
    n_steps: int = 0

    def __post_init__(self):
        for name in ("grid", "phi", "dphi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def r_end(self) -> float:
        return float(self.grid[-1])

    @property
    def is_global(self) -> bool:
        return self.outcome.kind is OutcomeKind.GLOBAL

    def interpolant(self) -> CubicHermiteSpline:
        """Cubic Hermite interpolant of ``phi`` on ``[0, r_end]``."""
        r = np.concatenate(([0.0], self.grid))
        phi = np.concatenate(([1.0], self.phi))
        dphi = np.concatenate(([0.0], self.dphi))
        return CubicHermiteSpline(r, phi, dphi, extrapolate=False)

    def __call__(self, r):
        return self.interpolant()(r)

    def evaluate(self, r, anchor: float | None = None, n_sub: int | None = None):
        """High-accuracy ``(phi, phi')`` at radii ``r`` near one grid node.

        Each value is obtained by ``n_sub`` equal Dormand-Prince substeps
        from the grid node nearest ``anchor``.  For a fixed anchor and
        substep count the map ``r -> phi(r)`` is smooth, so finite
        differences of the result carry no interpolation noise.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        anchor = float(np.mean(r)) if anchor is None else anchor
        i = int(np.argmin(np.abs(self.grid - anchor)))
        r_a = self.grid[i]
        y_a = np.array([self.phi[i], self.dphi[i]])
        if n_sub is None:
            span = float(np.max(np.abs(r - r_a)))
            n_sub = max(1, math.ceil(span / (0.25 * self.controls.step_cap * (1.0 + r_a))))
        f = _linear_rhs(self.params, self.lam)
        out = np.empty((r.size, 2))
        for j, rj in enumerate(r):
            if rj == 0.0:
                out[j] = (1.0, 0.0)
                continue
            h = (rj - r_a) / n_sub
            y, t = y_a, r_a
            for _ in range(n_sub):
                if h == 0.0:
                    break
                y = rk_step(f, t, y, h)
                t += h
            out[j] = y
        return out[:, 0], out[:, 1]

    def to_csv(self, path=None, eta: float | None = None) -> str:
        """CSV dump ``r,phi,dphi,theta,g_eta`` with 17 significant digits."""
        eta = 2.0 * self.params.kappa if eta is None else eta
        theta = (theta_view(self) if self.params.sigma is not None
                 else np.full(self.grid.shape, math.nan))
        g = g_view(self, eta)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "phi", "dphi", "theta", "g_eta"])
        for row in zip(self.grid, self.phi, self.dphi, theta, g):
            writer.writerow([f"{v:.17g}" for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _finish(lam, rs, ps, dps, outcome, params, controls, taylor, stepper_steps):
    return ProfileSolution(lam=lam, grid=np.array(rs), phi=np.array(ps), dphi=np.array(dps),
                           outcome=outcome, params=params, controls=controls,
                           taylor_error=taylor.error_bound, n_steps=stepper_steps)


def integrate_profile(params: ModelParams, lam: float,
                      controls: ProfileControls | None = None) -> ProfileSolution:
    """Integrate from the Taylor start and classify the trajectory.

    Above ``phi_ceiling`` the state switches to ``(ln phi, phi'/phi)`` and
    blow-up is declared only once the superlinear escape test passes, so
    near-critical profiles that overshoot the ceiling and fall back are not
    mistaken for blow-up.  Touch-zero is a sign change of ``phi`` (located
    on the dense output) or a decreasing ``phi`` below ``phi_floor``.

    Raises
    ------
    StepUnderflow
        With ``partial`` set to a solution carrying the estimated outcome.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    c = controls or ProfileControls()
    p = params
    taylor = taylor_start(p, lam, c.r0)
    cap = lambda r: c.step_cap * (1.0 + r)  # noqa: E731
    rs, ps, dps = [], [], []
    log_ceiling = math.log(c.phi_ceiling)

    def lin_stepper(r, phi, dphi, h=None):
        return Stepper(_linear_rhs(p, lam), r, [phi, dphi], rtol=c.rel_tol, atol=c.abs_tol,
                       first_step=h, max_step=cap)

    def log_stepper(r, ell, w, h=None):
        return Stepper(_log_rhs(p, lam), r, [ell, w], rtol=c.rel_tol, atol=c.abs_tol,
                       first_step=h, max_step=cap)

    rs.append(c.r0)
    ps.append(taylor.phi)
    dps.append(taylor.dphi)
    mode = "lin"
    st = lin_stepper(c.r0, taylor.phi, taylor.dphi, h=min(c.r0, cap(c.r0)))
    n_steps = 0
    while True:
        try:
            t0, y0, f0 = st.step(c.r_max)
        except StepUnderflow as exc:
            r = st.t
            if mode == "log" or (st.y[0] > 1 and st.y[1] > 0):
                est = Outcome(OutcomeKind.BLOW_UP, r)
            elif st.y[1] < 0:
                est = Outcome(OutcomeKind.TOUCH_ZERO, r)
            else:
                est = Outcome(OutcomeKind.GLOBAL, r, bounded=False)
            partial = _finish(lam, rs, ps, dps, est, p, c, taylor, n_steps)
            raise StepUnderflow(str(exc), partial=partial) from None
        n_steps += 1
        r, y = st.t, st.y
        if mode == "lin":
            phi, dphi = y
            if phi <= 0.0:
                R = hermite_root(t0, y0, f0, r, y, st.f, component=0)
                return _finish(lam, rs, ps, dps, Outcome(OutcomeKind.TOUCH_ZERO, R),
                               p, c, taylor, n_steps)
            rs.append(r)
            ps.append(phi)
            dps.append(dphi)
            if phi < c.phi_floor and dphi < 0:
                R = r + phi / abs(dphi)
                return _finish(lam, rs, ps, dps, Outcome(OutcomeKind.TOUCH_ZERO, R),
                               p, c, taylor, n_steps)
            if phi > c.phi_ceiling:
                mode = "log"
                st = log_stepper(r, math.log(phi), dphi / phi, h=st.h)
        else:
            ell, w = y
            if ell < LOG_MAX:
                phi = math.exp(ell)
                rs.append(r)
                ps.append(phi)
                dps.append(w * phi)
            ok, G = _escape_confirmed(p, lam, r, ell, w, c.escape_margin)
            if ok:
                R = r + blowup_distance(w, G, p.q, p.D_v)
                return _finish(lam, rs, ps, dps, Outcome(OutcomeKind.BLOW_UP, R),
                               p, c, taylor, n_steps)
            if ell < log_ceiling - math.log(10.0):
                mode = "lin"
                phi = math.exp(ell)
                st = lin_stepper(r, phi, w * phi, h=st.h)
        if r >= c.r_max:
            bounded = mode == "lin"
            return _finish(lam, rs, ps, dps, Outcome(OutcomeKind.GLOBAL, r, bounded=bounded),
                           p, c, taylor, n_steps)


def theta_view(sol: ProfileSolution) -> np.ndarray:
    """``theta(r) = phi(r) exp(-sigma r^2)`` on the solution grid."""
    sigma = sol.params.sigma
    if sigma is None:
        raise TransformUndefined("theta transform needs q > 1")
    return sol.phi * np.exp(-sigma * sol.grid ** 2)


def theta_inverse(params: ModelParams, r, theta) -> np.ndarray:
    if params.sigma is None:
        raise TransformUndefined("theta transform needs q > 1")
    return np.asarray(theta) * np.exp(params.sigma * np.asarray(r) ** 2)


def g_view(sol: ProfileSolution, eta: float) -> np.ndarray:
    """``g_eta(r) = phi(r) r^(-eta)``; ``eta = 2 kappa`` gives the rate-normalized profile."""
    return sol.phi * sol.grid ** (-eta)
