"""Space-time solutions built from a profile, and their invariants.

With ``r = |x|/sqrt(t)`` the pair

    u(x, t) = A t^(-N/2) phi(r)^(chi/D_u) exp(-r^2/(4 D_u)),
    v(x, t) = B t^kappa phi(r),

solves the chemotaxis-consumption system

    u_t = D_u lap u - chi div(u grad log v),
    v_t = D_v lap v - v^alpha u

whenever ``phi`` is a profile with ``lam = A B^(alpha-1)``.  All radial
integrals below are taken in the similarity variable, where they no longer
depend on ``t``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .asymptotics import fit_rate, weighted_decay_check
from .errors import (NotGlobal, OutOfDomain, StencilOutOfDomain, ValidationError, WrongRegime)
from .ode import OutcomeKind, ProfileSolution

QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-13, limit=500)
#: relative gap between the two bracketing profiles still trusted as "connecting"
TRUST_GAP = 1e-6
DIRECT_BREAKS = 257


@dataclass(frozen=True)
class TailLaw:
    """Extension of ``phi`` beyond ``r_join``.

    ``kind = "algebraic"``: ``phi = C r^(2 kappa)``.
    ``kind = "gaussian"``: ``phi = C r^(-2 kappa - N) exp(-r^2/(4 D_v))``.
    """

    kind: str
    r_join: float
    C: float
    kappa: float
    N: int
    D_v: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "algebraic":
            return self.C * r ** (2.0 * self.kappa)
        return self.C * r ** (-2.0 * self.kappa - self.N) * np.exp(-r * r / (4.0 * self.D_v))


def algebraic_tail(sol: ProfileSolution) -> TailLaw:
    """``M* r^(2 kappa)`` tail from a converged plateau fit.

    Raises
    ------
    OutOfDomain
        If the fit did not converge.
    """
    fit = fit_rate(sol)
    if not fit.converged:
        raise OutOfDomain(f"rate fit not converged (defect {fit.plateau_defect:.3g})")
    p = sol.params
    return TailLaw("algebraic", sol.r_end, fit.M_star, p.kappa, p.N, p.D_v)


def gaussian_tail(lower: ProfileSolution, upper: ProfileSolution,
                  gap: float = TRUST_GAP) -> TailLaw:
    """Gaussian tail joined where two bracketing profiles stop agreeing.

    ``lower`` and ``upper`` are the endpoint profiles of a critical search in
    the very singular band.  They coincide with the connecting profile up to
    the radius where their relative gap exceeds ``gap``; the tail constant
    is matched at that radius.
    """
    p = lower.params
    r = lower.grid[(lower.grid <= lower.r_end) & (lower.grid <= upper.r_end) & (lower.phi > 0)]
    a = lower.interpolant()(r)
    b = upper.interpolant()(r)
    rel = np.abs(a - b) / np.maximum(np.abs(b), 1e-300)
    bad = np.nonzero(rel > gap)[0]
    r_join = float(r[bad[0] - 1] if bad.size and bad[0] > 0 else r[-1])
    phi_join = float(0.5 * (lower.interpolant()(r_join) + upper.interpolant()(r_join)))
    shape = r_join ** (-2.0 * p.kappa - p.N) * math.exp(-r_join ** 2 / (4.0 * p.D_v))
    return TailLaw("gaussian", r_join, phi_join / shape, p.kappa, p.N, p.D_v)


@dataclass(frozen=True)
class SelfSimilarSolution:
    """Profile plus amplitudes.

    ``A B^(alpha-1)`` must equal ``profile.lam``.  ``v_exponent`` overrides
    the time exponent of ``v`` (used to build deliberately inconsistent
    fields); it defaults to ``kappa``.
    """

    profile: ProfileSolution
    A: float
    B: float
    tail: TailLaw | None = None
    v_exponent: float | None = None
    _spline: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        p = self.profile.params
        if not (self.A >= 0 and self.B > 0):
            raise ValidationError("need A >= 0 and B > 0")
        lam = self.A * self.B ** (p.alpha - 1.0)
        if not math.isclose(lam, self.profile.lam, rel_tol=1e-12, abs_tol=1e-300):
            raise ValidationError(
                f"A B^(alpha-1) = {lam!r} does not match the profile parameter {self.profile.lam!r}")
        object.__setattr__(self, "_spline", self.profile.interpolant())

    @classmethod
    def from_profile(cls, profile: ProfileSolution, B: float = 1.0, tail: TailLaw | None = None,
                     v_exponent: float | None = None) -> "SelfSimilarSolution":
        A = profile.lam / B ** (profile.params.alpha - 1.0)
        return cls(profile, A, B, tail, v_exponent)

    @property
    def params(self):
        return self.profile.params

    @property
    def kappa_v(self) -> float:
        return self.params.kappa if self.v_exponent is None else self.v_exponent

    @property
    def r_join(self) -> float:
        return self.tail.r_join if self.tail is not None else self.profile.r_end

    def phi(self, r) -> np.ndarray:
        """Profile with the tail law beyond ``r_join``."""
        r = np.abs(np.asarray(r, dtype=float))
        inside = r <= self.r_join
        if not np.all(inside) and self.tail is None:
            raise OutOfDomain(f"r = {r.max():g} beyond the profile grid ({self.r_join:g}) "
                              "and no tail law is attached")
        out = np.empty_like(r)
        out[inside] = self._spline(r[inside])
        if not np.all(inside):
            out[~inside] = self.tail(r[~inside])
        return out

    def u_profile(self, r) -> np.ndarray:
        """``A phi^(chi/D_u) exp(-r^2/(4 D_u))``, i.e. ``u`` at ``t = 1``."""
        p = self.params
        r = np.asarray(r, dtype=float)
        return self.A * self.phi(r) ** p.chi_over_Du * np.exp(-r * r / (4.0 * p.D_u))


def _radii(x, N):
    x = np.asarray(x, dtype=float)
    if N > 1 and x.ndim >= 1 and x.shape[-1] == N:
        return np.linalg.norm(x, axis=-1)
    return np.abs(x)


def reconstruct(sss: SelfSimilarSolution, t: float, x_grid):
    """``(u, v)`` at time ``t``.

    ``x_grid`` holds points with a trailing axis of length ``N`` or, for any
    ``N``, plain radii ``|x|``.
    """
    if not t > 0:
        raise ValidationError("t must be positive")
    p = sss.params
    rho = _radii(x_grid, p.N)
    r = rho / math.sqrt(t)
    phi = sss.phi(r)
    u = sss.A * t ** (-p.N / 2.0) * phi ** p.chi_over_Du * np.exp(-r * r / (4.0 * p.D_u))
    v = sss.B * t ** sss.kappa_v * phi
    return u, v


def fields_csv(sss: SelfSimilarSolution, times, x_grid, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "u", "v"])
    for t in times:
        u, v = reconstruct(sss, t, x_grid)
        for x, a, b in zip(np.asarray(x_grid, dtype=float), u, v):
            w.writerow([f"{t:.17g}", f"{x:.17g}", f"{a:.17g}", f"{b:.17g}"])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _radial_integral(f, r_join, tail_part=None, breaks=()):
    """``int_0^inf f`` split at ``r_join`` and at the spline knots in ``breaks``."""
    edges = np.unique(np.concatenate(([0.0], np.asarray(breaks, dtype=float), [r_join])))
    edges = edges[edges <= r_join]
    inner = sum(quad(f, a, b, **QUAD_OPTS)[0] for a, b in zip(edges[:-1], edges[1:]))
    outer = quad(tail_part, r_join, np.inf, **QUAD_OPTS)[0] if tail_part is not None else 0.0
    return inner, outer


def _knots(sss, every=8):
    # sub-sample of grid nodes as quadrature breakpoints; the integrands are
    # only piecewise smooth across the Hermite knots
    return sss.profile.grid[::every]


def mass_parts(sss: SelfSimilarSolution):
    """``(inner, tail)`` contributions to the mass."""
    p = sss.params
    area = p.sphere_area
    if sss.A == 0:
        return 0.0, 0.0

    def f(r):
        return area * float(sss.u_profile(r)) * r ** (p.N - 1)
    tail = f if sss.tail is not None else None
    return _radial_integral(f, sss.r_join, tail, _knots(sss))


def mass(sss: SelfSimilarSolution) -> float:
    """``A |S^(N-1)| int phi^(chi/D_u) exp(-r^2/(4 D_u)) r^(N-1) dr``."""
    inner, tail = mass_parts(sss)
    return inner + tail


def lp_norm_constant(sss: SelfSimilarSolution, p: float) -> float:
    """``t^(N/2 (1 - 1/p)) ||u(., t)||_p``, the same for every ``t``.

    ``p = inf`` gives ``A sup phi^(chi/D_u) exp(-r^2/(4 D_u))``.
    """
    prm = sss.params
    if not p > 1:
        raise ValidationError(f"need p > 1, got {p!r}")
    if math.isinf(p):
        return _sup(lambda r: float(sss.u_profile(r)), sss.r_join, sss.profile.grid)
    area = prm.sphere_area

    def f(r):
        return area * float(sss.u_profile(r)) ** p * r ** (prm.N - 1)
    inner, tail = _radial_integral(f, sss.r_join, f if sss.tail is not None else None,
                                   _knots(sss))
    return (inner + tail) ** (1.0 / p)


def _sup(f, r_max, grid):
    r = np.concatenate(([0.0], np.asarray(grid)[np.asarray(grid) <= r_max]))
    vals = np.array([f(x) for x in r])
    i = int(np.argmax(vals))
    best = vals[i]
    lo, hi = r[max(i - 1, 0)], r[min(i + 1, len(r) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = max(best, -res.fun)
    return float(best)


def direct_norm(sss: SelfSimilarSolution, t: float, p: float) -> float:
    """``t^(N/2 (1 - 1/p)) ||u(., t)||_p`` by quadrature of :func:`reconstruct` in ``|x|``.

    ``p = 1`` is the mass.  Used to confirm time invariance independently of
    the similarity-variable formulas.
    """
    prm = sss.params
    s = math.sqrt(t)
    area = prm.sphere_area
    if math.isinf(p):
        val = _sup(lambda x: float(reconstruct(sss, t, np.array([x]))[0][0]),
                   s * sss.r_join, s * sss.profile.grid)
        return t ** (prm.N / 2.0) * val

    def f(x):
        return area * float(reconstruct(sss, t, np.array([x]))[0][0]) ** p * x ** (prm.N - 1)
    # uniform breakpoints in x, unrelated to the profile knots, so this is a
    # genuinely different quadrature from the similarity-variable one
    breaks = np.linspace(0.0, s * sss.r_join, DIRECT_BREAKS)
    inner, tail = _radial_integral(f, s * sss.r_join, f if sss.tail is not None else None,
                                   breaks)
    total = inner + tail
    return t ** (prm.N / 2.0 * (1.0 - 1.0 / p)) * total ** (1.0 / p)


def very_singular_moment(sss: SelfSimilarSolution) -> float:
    """``B |S^(N-1)| int r^(-2 kappa - 1) phi dr`` in the very singular band.

    Raises
    ------
    WrongRegime
        If ``kappa >= -N/2``.
    NotGlobal
        If ``phi sqrt(rho)`` is not decreasing on the trailing window.
    """
    p = sss.params
    if not p.kappa < -p.N / 2.0:
        raise WrongRegime(f"the moment needs kappa < -N/2, got kappa = {p.kappa:g}")
    if not weighted_decay_check(sss.profile).monotone_decreasing:
        raise NotGlobal("phi sqrt(rho) is not decreasing; the moment may diverge")
    area = p.sphere_area

    def f(r):
        return area * sss.B * r ** (-2.0 * p.kappa - 1.0) * float(sss.phi(r))
    inner, tail = _radial_integral(f, sss.r_join, f if sss.tail is not None else None,
                                   _knots(sss))
    return inner + tail


@dataclass(frozen=True)
class MassReport:
    M: float
    Mp: dict
    M1: float | None
    t_invariance_defect: float
    tail_mass_fraction: float = 0.0

    def report(self) -> dict:
        return {"M": self.M, "Mp": {str(k): v for k, v in self.Mp.items()}, "M1": self.M1,
                "t_invariance_defect": self.t_invariance_defect,
                "tail_mass_fraction": self.tail_mass_fraction}

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2, sort_keys=True)


def mass_report(sss: SelfSimilarSolution, ps=(2.0, math.inf),
                probe_times=(0.25, 1.0, 4.0)) -> MassReport:
    inner, tail = mass_parts(sss)
    M = inner + tail
    Mp = {p: lp_norm_constant(sss, p) for p in ps}
    drift = 0.0
    for p, ref in [(1.0, M)] + list(Mp.items()):
        for t in probe_times:
            val = direct_norm(sss, t, p)
            if ref > 0:
                drift = max(drift, abs(val / ref - 1.0))
    prm = sss.params
    M1 = very_singular_moment(sss) if prm.kappa < -prm.N / 2.0 else None
    return MassReport(M=M, Mp=Mp, M1=M1, t_invariance_defect=drift,
                      tail_mass_fraction=tail / M if M > 0 else 0.0)


def delta_probe(sss: SelfSimilarSolution, test_fn=None, t_ladder=(1e-2, 1e-3, 1e-4)):
    """``|int u(x, t) f(x) dx - M f(0)|`` along ``t_ladder`` for a radial ``f``.

    ``test_fn`` maps ``|x|`` to ``f``; the default is ``exp(-|x|^2)``.
    Each integral is taken in ``xi = x/sqrt(t)``.
    """
    f = test_fn if test_fn is not None else (lambda s: math.exp(-s * s))
    p = sss.params
    area = p.sphere_area
    M = mass(sss)
    f0 = f(0.0)
    rows = []
    for t in t_ladder:
        s = math.sqrt(t)

        def g(xi):
            return area * float(sss.u_profile(xi)) * f(s * xi) * xi ** (p.N - 1)
        inner, tail = _radial_integral(g, sss.r_join, g if sss.tail is not None else None,
                                       _knots(sss))
        val = inner + tail
        rows.append({"t": t, "integral": val, "error": abs(val - M * f0)})
    return rows


def v_singularity_probe(sss: SelfSimilarSolution, epsilon: float = 1.0,
                        t_ladder=(1e-2, 1e-3, 1e-4), p: float | None = None) -> dict:
    """Local integrals of ``v`` (and of ``v^p``) over ``|x| < epsilon``.

    In the similarity variable

        int_{|x|<eps} v^p dx = B^p |S^(N-1)| t^(p kappa + N/2) int_0^(eps/sqrt t) phi^p r^(N-1) dr.

    Raises
    ------
    WrongRegime
        If ``kappa >= 0``.
    """
    prm = sss.params
    if prm.kappa >= 0:
        raise WrongRegime(f"v is regular for kappa = {prm.kappa:g} >= 0")
    area = prm.sphere_area

    def local(t, power):
        upper = epsilon / math.sqrt(t)

        def f(r):
            return float(sss.phi(r)) ** power * r ** (prm.N - 1)
        knots = _knots(sss)
        if upper <= sss.r_join:
            inner, _ = _radial_integral(f, upper, None, knots[knots < upper])
            outer = 0.0
        else:
            inner, _ = _radial_integral(f, sss.r_join, None, knots)
            outer = quad(f, sss.r_join, upper, **QUAD_OPTS)[0]
        return sss.B ** power * area * t ** (power * prm.kappa + prm.N / 2.0) * (inner + outer)

    out = {"t": list(t_ladder), "local_integrals": [local(t, 1.0) for t in t_ladder]}
    if p is not None:
        out["p"] = p
        out["local_p_integrals"] = [local(t, p) for t in t_ladder]
    return out


def _stencil_values(sss, rho, t, h):
    """``phi`` at the nine radius/time combinations of the stencil around ``(rho, t)``."""
    rs = np.array([abs(rho - h), rho, rho + h])
    ts = np.array([t - h, t, t + h])
    r = np.concatenate([rs / math.sqrt(t), rho / np.sqrt(ts[[0, 2]])])
    phi, _ = sss.profile.evaluate(r, anchor=rho / math.sqrt(t))
    return rs, ts, phi


def pde_residual(sss: SelfSimilarSolution, t_sample: float, x_sample_grid, h: float) -> dict:
    """Relative residuals of both equations on centered radial stencils.

    Each pointwise residual is divided by the largest of its three terms
    (0/0 counts as 0).  The chemotaxis flux is expanded as

        div(u grad log v) = u_r (log v)_r + u ((log v)_rr + (N-1)/r (log v)_r),

    and at the origin the ``(N-1)/r`` terms are replaced by their limits.

    Raises
    ------
    StencilOutOfDomain
        If ``t_sample - h <= 0`` or a stencil point leaves the profile grid.
    """
    prm = sss.params
    if not t_sample - h > 0:
        raise StencilOutOfDomain("t - h must be positive")
    rho_all = _radii(x_sample_grid, prm.N).ravel()
    r_need = (rho_all.max() + h) / math.sqrt(t_sample - h)
    if r_need > sss.profile.r_end:
        raise StencilOutOfDomain(f"stencil reaches r = {r_need:g} beyond {sss.profile.r_end:g}")
    a = prm.chi_over_Du
    k_v = sss.kappa_v
    worst_u = worst_v = 0.0
    pointwise = []
    for rho in rho_all:
        rs, ts, phi = _stencil_values(sss, rho, t_sample, h)
        if np.any(phi <= 0):
            raise StencilOutOfDomain("profile not positive on the stencil")

        def U(r, t, ph):
            return sss.A * t ** (-prm.N / 2.0) * ph ** a * np.exp(-r * r / (4.0 * prm.D_u * t))

        def V(t, ph):
            return sss.B * t ** k_v * ph

        u_x = U(rs, t_sample, phi[:3])
        v_x = V(t_sample, phi[:3])
        u_t = (U(rho, ts[2], phi[4]) - U(rho, ts[0], phi[3])) / (2 * h)
        v_t = (V(ts[2], phi[4]) - V(ts[0], phi[3])) / (2 * h)
        lv = np.log(v_x)
        d1 = lambda f: (f[2] - f[0]) / (2 * h)  # noqa: E731
        d2 = lambda f: (f[2] - 2 * f[1] + f[0]) / (h * h)  # noqa: E731
        if rho == 0.0:
            # even extension: f(-h) = f(h); (N-1)/r f_r -> (N-1) f_rr
            lap_u, lap_v = prm.N * d2(u_x), prm.N * d2(v_x)
            flux = u_x[1] * prm.N * d2(lv)
        else:
            lap_u = d2(u_x) + (prm.N - 1) / rho * d1(u_x)
            lap_v = d2(v_x) + (prm.N - 1) / rho * d1(v_x)
            flux = d1(u_x) * d1(lv) + u_x[1] * (d2(lv) + (prm.N - 1) / rho * d1(lv))
        terms_u = (u_t, prm.D_u * lap_u, prm.chi * flux)
        terms_v = (v_t, prm.D_v * lap_v, v_x[1] ** prm.alpha * u_x[1])
        res_u = terms_u[0] - terms_u[1] + terms_u[2]
        res_v = terms_v[0] - terms_v[1] + terms_v[2]
        ru = _relative(res_u, terms_u)
        rv = _relative(res_v, terms_v)
        pointwise.append((float(rho), ru, rv))
        worst_u, worst_v = max(worst_u, ru), max(worst_v, rv)
    return {"max_relative": max(worst_u, worst_v), "u_equation": worst_u,
            "v_equation": worst_v, "pointwise": pointwise}


def _relative(res, terms):
    scale = max(abs(x) for x in terms)
    if scale == 0.0:
        return 0.0
    return float(abs(res) / scale)


def require_global(sol: ProfileSolution):
    if sol.outcome.kind is not OutcomeKind.GLOBAL:
        raise NotGlobal(f"need a global profile, got {sol.outcome}")
