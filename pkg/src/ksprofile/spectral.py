"""Principal eigenvalue of the weighted radial problem

    (s phi')' + lam s phi = 0  on (0, R),   s(r) = r^(N-1) exp(delta r^2),
    phi'(0) = 0,  phi(R) = 0.

Writing ``phi = exp(-delta r^2) psi`` turns the equation into

    psi'' + ((N-1)/r - 2 delta r) psi' + (lam - 2 N delta) psi = 0,

whose solution is ``psi = 1`` at ``lam = 2 N delta``.  The shift
``mu = lam - 2 N delta`` is then the natural unknown: the first zero of
``psi`` moves inward monotonically as ``mu`` grows, and ``psi`` never has to
resolve the Gaussian decay of ``phi`` itself.  The derivative is carried
as ``psi' = -mu (r/N) exp(K)``, where ``K(0) = 0`` obeys the smooth equation

    K' = 2 delta r + (N/r) (psi exp(-K) - 1),

independent of ``mu``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBracket, ToleranceNotReached, ValidationError
from .integrators import Stepper
from .model import ModelParams

DEFAULT_TOL = 1e-10
MAX_ITER = 200
PSI_ESCAPE = 1e100
MU_FLOOR = 1e-290
MU_RTOL = 1e-6
LADDER = (5.0, 10.0, 20.0, 40.0)


@dataclass(frozen=True)
class EigenProblem:
    N: int
    delta: float
    R: float

    def __post_init__(self):
        if not (self.delta > 0):
            raise ValidationError(f"delta must be positive, got {self.delta!r}")
        if not (self.R > 0):
            raise ValidationError(f"R must be positive, got {self.R!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N!r}")

    @property
    def limit(self) -> float:
        """Eigenvalue on the whole half-line, ``2 N delta``."""
        return 2.0 * self.N * self.delta


@dataclass(frozen=True)
class EigenResult:
    lam: float
    grid: np.ndarray
    eigenfunction: np.ndarray
    iterations: int = 0
    #: ``lam - 2 N delta``, resolved far below the rounding of ``lam``
    shift: float = 0.0


def _log_rhs(N, delta, mu):
    # psi' = -mu (r/N) exp(K): the growing mode lives in the smooth exponent
    # K, so relative accuracy of psi' costs nothing even where it spans 1e100
    log_mu = math.log(abs(mu)) if mu != 0 else -math.inf
    sign = math.copysign(1.0, mu)

    def f(r, y):
        psi, K = y
        dpsi = -sign * math.exp(min(log_mu + math.log(r / N) + K, 700.0)) if mu != 0 else 0.0
        return np.array([dpsi, 2.0 * delta * r + N / r * (psi * math.exp(-K) - 1.0)])
    return f


def _shoot(prob: EigenProblem, mu: float, record: bool = False, rtol: float = 1e-12):
    """Integrate ``psi`` up to ``R``; return (first zero or None, grid, psi)."""
    R = prob.R
    r0 = min(1e-6, 1e-4 * R)
    psi0 = 1.0 - mu * r0 * r0 / (2 * prob.N)
    st = Stepper(_log_rhs(prob.N, prob.delta, mu), r0, [psi0, 0.0],
                 rtol=rtol, atol=rtol, first_step=r0, max_step=0.05 * max(R, 1.0),
                 componentwise=True)
    rs, ps = [0.0, r0], [1.0, psi0]
    while st.t < R:
        t0, y0, _ = st.step(R)
        if st.y[0] <= 0.0:
            # linear interpolation is enough: only "zero before R" matters here
            z = t0 + (st.t - t0) * y0[0] / (y0[0] - st.y[0])
            return z, np.array(rs), np.array(ps)
        if record:
            rs.append(st.t)
            ps.append(st.y[0])
        if st.y[0] > PSI_ESCAPE:
            return None, np.array(rs), np.array(ps)
    return None, np.array(rs), np.array(ps)


def has_zero(prob: EigenProblem, lam: float) -> bool:
    """True when the shot solution vanishes somewhere in ``(0, R]``."""
    if lam <= prob.limit:
        # psi'' - 2 delta r psi' ... = |mu| psi keeps psi >= 1 for mu <= 0
        return False
    return _shoot(prob, lam - prob.limit)[0] is not None


def principal_eigenvalue(prob: EigenProblem, tol: float = DEFAULT_TOL,
                         max_iter: int = MAX_ITER) -> EigenResult:
    """Smallest ``lam`` whose shot solution first vanishes at ``R``.

    Bisection on the shift ``mu = lam - 2 N delta`` with "has a zero in
    ``(0, R]``" as the indicator.  The bisection is geometric in ``mu``
    and stops once the bracket is narrower than ``tol * max(1, lam)`` and
    also within ``MU_RTOL`` of ``mu`` itself, so that the exponentially
    small shifts at large ``R`` stay ordered.  ``R = inf`` returns the closed form
    ``2 N delta`` with eigenfunction ``exp(-delta r^2)``.

    Raises
    ------
    ToleranceNotReached
        If ``max_iter`` halvings are not enough.
    """
    if math.isinf(prob.R):
        r = np.linspace(0.0, 20.0, 401)
        return EigenResult(prob.limit, r, np.exp(-prob.delta * r * r))
    # the shift spans hundreds of decades across R, so bracket and bisect it
    # geometrically; the bracket is then relative to mu itself
    hi = max(1.0, 1.0 / prob.R ** 2)
    while _shoot(prob, hi)[0] is None:
        hi *= 2.0
        if hi > 1e300:
            raise InvalidBracket("no eigenvalue bracket found")
    lo = hi
    while _shoot(prob, lo)[0] is not None:
        hi, lo = lo, lo * 1e-8
        if lo < MU_FLOOR:
            lo = 0.0
            break
    it = 0
    def done(lo, hi):
        lam_ok = hi - lo <= tol * max(1.0, prob.limit + hi)
        return lam_ok and (lo == 0.0 or hi / lo - 1.0 <= MU_RTOL)

    while not done(lo, hi):
        if it >= max_iter:
            raise ToleranceNotReached(f"bracket width {hi - lo:.3e} after {it} iterations")
        # sqrt(lo * hi) would underflow for shifts below 1e-154
        mid = math.sqrt(lo) * math.sqrt(hi) if lo > 0 else 0.5 * hi
        if _shoot(prob, mid)[0] is None:
            lo = mid
        else:
            hi = mid
        it += 1
    mu = 0.5 * (lo + hi)
    _, r, psi = _shoot(prob, lo, record=True)
    r = np.append(r, prob.R) if r[-1] < prob.R else r
    psi = np.append(psi, 0.0) if psi.size < r.size else psi
    return EigenResult(prob.limit + mu, r, np.exp(-prob.delta * r * r) * psi, it, mu)


def gaussian_mode_residual(prob: EigenProblem, r) -> np.ndarray:
    """Residual of ``exp(-delta r^2)`` with ``lam = 2 N delta``, divided by the weight.

    Derivatives are taken in closed form, so only rounding remains.
    """
    r = np.asarray(r, dtype=float)
    d = prob.delta
    phi = np.exp(-d * r * r)
    dphi = -2.0 * d * r * phi
    d2phi = (4.0 * d * d * r * r - 2.0 * d) * phi
    return d2phi + ((prob.N - 1) / r + 2.0 * d * r) * dphi + prob.limit * phi


def ladder(N: int, delta: float, radii=LADDER, tol: float = DEFAULT_TOL):
    return [(float(R), principal_eigenvalue(EigenProblem(N, delta, R), tol).lam) for R in radii]


def ladder_csv(rows, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["R", "lambda"])
    for R, lam in rows:
        w.writerow([f"{R:.17g}", f"{lam:.17g}"])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def regime_boundary_check(params: ModelParams, radii=LADDER, tol: float = DEFAULT_TOL) -> dict:
    """Compare the scaled half-line eigenvalue with the regime edge ``kappa = -N/2``.

    With ``delta = 1/(4 D_v)`` the half-line eigenvalue is ``N/(2 D_v)``;
    multiplied by ``D_v`` it equals ``N/2`` for every diffusivity.
    """
    delta = 1.0 / (4.0 * params.D_v)
    results = [principal_eigenvalue(EigenProblem(params.N, delta, float(R)), tol) for R in radii]
    rows = [(float(R), res.lam) for R, res in zip(radii, results)]
    limit = 2.0 * params.N * delta
    # the shifts stay resolved after lam itself has rounded to the limit
    gaps = [res.shift for res in results]
    return {
        "N": params.N,
        "D_v": params.D_v,
        "delta": delta,
        "ladder": [{"R": R, "lambda": lam} for R, lam in rows],
        "limit": limit,
        "extrapolated": rows[-1][1],
        "scaled_limit": limit * params.D_v,
        "boundary_minus_kappa": params.N / 2.0,
        "matches": math.isclose(limit * params.D_v, params.N / 2.0, rel_tol=1e-14),
        "gaps": gaps,
        "gaps_decreasing": all(0 < b < a for a, b in zip(gaps, gaps[1:])),
    }
