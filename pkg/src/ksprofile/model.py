"""Model parameters, scaling exponents and the singularity classifier.

The self-similar ansatz ``u = t^{-N/2} U(|x|/sqrt t)``, ``v = t^kappa V(|x|/sqrt t)``
is consistent with the chemotaxis system only when

    kappa (1 - alpha) = 1 - N/2.

For ``alpha = 1`` this forces ``N = 2`` and leaves ``kappa`` free.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ExponentBelowOne, InvalidScaling, NonPositiveDiffusivity

#: relative tolerance used when deciding whether kappa sits on a band edge
BAND_EDGE_RTOL = 1e-12


class _AnyKappa:
    """Marker returned by :func:`derive_kappa` when ``N = 2, alpha = 1``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ANY_KAPPA"


ANY_KAPPA = _AnyKappa()


class SingularityTag(str, enum.Enum):
    REGULAR = "regular"
    LESS_SINGULAR = "less_singular"
    VERY_SINGULAR = "very_singular"
    ANY_DEPENDS_ON_KAPPA = "any_depends_on_kappa"


@dataclass(frozen=True)
class SingularityClass:
    tag: SingularityTag
    kappa_band: tuple[float, float]
    kappa: float | None = None

    def __str__(self):
        return self.tag.value


def derive_kappa(N: int, alpha: float):
    """Return the scaling exponent for dimension ``N`` and consumption ``alpha``.

    Returns :data:`ANY_KAPPA` for ``(N, alpha) = (2, 1)``.

    Raises
    ------
    InvalidScaling
        If ``alpha = 1`` and ``N != 2``.
    """
    if int(N) != N or N < 1:
        raise InvalidScaling(f"N must be a positive integer, got {N!r}")
    if alpha < 0:
        raise InvalidScaling(f"alpha must be >= 0, got {alpha!r}")
    if alpha == 1:
        if N == 2:
            return ANY_KAPPA
        raise InvalidScaling(
            f"alpha = 1 requires N = 2 (0*kappa = {1 - N / 2:g} has no solution)"
        )
    return (1.0 - N / 2.0) / (1.0 - alpha)


def _band(N: int, kappa: float) -> SingularityClass:
    edge = -N / 2.0
    tol = BAND_EDGE_RTOL * max(1.0, abs(edge))
    if kappa >= -tol:
        return SingularityClass(SingularityTag.REGULAR, (0.0, math.inf), kappa)
    if kappa <= edge + tol:
        return SingularityClass(SingularityTag.VERY_SINGULAR, (-math.inf, edge), kappa)
    return SingularityClass(SingularityTag.LESS_SINGULAR, (edge, 0.0), kappa)


def classify_v(N: int, alpha: float, kappa: float | None = None) -> SingularityClass:
    """Classify the initial singularity of ``v`` from the kappa band.

    ``kappa >= 0`` is regular, ``-N/2 < kappa < 0`` less singular and
    ``kappa <= -N/2`` very singular.  For ``(N, alpha) = (2, 1)`` the band is
    decided by the supplied ``kappa``; without one the tag is
    ``any_depends_on_kappa``.  Band edges are matched with a relative
    tolerance of ``BAND_EDGE_RTOL`` so that e.g. ``alpha = 2/3`` at ``N = 3``
    lands on the closed endpoint despite rounding.
    """
    k = derive_kappa(N, alpha)
    if k is ANY_KAPPA:
        if kappa is None:
            return SingularityClass(
                SingularityTag.ANY_DEPENDS_ON_KAPPA, (-math.inf, math.inf), None
            )
        return _band(N, float(kappa))
    return _band(N, k)


@dataclass(frozen=True)
class ModelParams:
    """Physical constants plus the derived exponents.

    Build instances with :meth:`create` (or :func:`validate`); the plain
    constructor does not check anything.
    """

    N: int
    D_u: float
    D_v: float
    chi: float
    alpha: float
    kappa: float
    q: float = field(default=math.nan)
    sigma: float | None = None

    @classmethod
    def create(cls, N, D_u=1.0, D_v=1.0, chi=1.0, alpha=0.0, kappa=None):
        raw = cls(N=N, D_u=D_u, D_v=D_v, chi=chi, alpha=alpha,
                  kappa=math.nan if kappa is None else kappa)
        return validate(raw, kappa_given=kappa is not None)

    @property
    def chi_over_Du(self) -> float:
        return self.chi / self.D_u

    @property
    def sphere_area(self) -> float:
        return sphere_area(self.N)

    def as_dict(self) -> dict:
        return {
            "N": self.N, "D_u": self.D_u, "D_v": self.D_v, "chi": self.chi,
            "alpha": self.alpha, "kappa": self.kappa, "q": self.q, "sigma": self.sigma,
        }


def validate(params: ModelParams, kappa_given: bool | None = None) -> ModelParams:
    """Check every parameter invariant and fill in ``kappa``, ``q`` and ``sigma``.

    ``kappa`` is taken from ``params`` only when ``N = 2, alpha = 1`` (where it
    is free); elsewhere it is derived, and a supplied value that disagrees
    with the scaling relation is rejected.
    """
    N = params.N
    if int(N) != N or N < 1:
        raise InvalidScaling(f"N must be a positive integer, got {N!r}")
    for name in ("D_u", "D_v", "chi"):
        value = getattr(params, name)
        if not (value > 0 and math.isfinite(value)):
            raise NonPositiveDiffusivity(f"{name} must be positive and finite, got {value!r}")
    if not (params.alpha >= 0 and math.isfinite(params.alpha)):
        raise InvalidScaling(f"alpha must be >= 0, got {params.alpha!r}")

    if kappa_given is None:
        kappa_given = not math.isnan(params.kappa)
    k = derive_kappa(int(N), params.alpha)
    if k is ANY_KAPPA:
        if not kappa_given:
            raise InvalidScaling("N = 2, alpha = 1 leaves kappa free; it must be supplied")
        kappa = float(params.kappa)
    else:
        if kappa_given and not math.isclose(params.kappa, k, rel_tol=1e-12, abs_tol=1e-14):
            raise InvalidScaling(
                f"kappa = {params.kappa!r} violates kappa (1 - alpha) = 1 - N/2 (expected {k!r})"
            )
        kappa = k

    q = params.alpha + params.chi / params.D_u
    if q < 1:
        raise ExponentBelowOne(f"q = alpha + chi/D_u = {q:g} < 1")
    denom = 4.0 * params.D_u * (params.alpha - 1.0) + 4.0 * params.chi
    sigma = 1.0 / denom if q > 1 else None
    return ModelParams(N=int(N), D_u=float(params.D_u), D_v=float(params.D_v),
                       chi=float(params.chi), alpha=float(params.alpha),
                       kappa=float(kappa), q=q, sigma=sigma)


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N."""
    table = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi, 4: 2.0 * math.pi ** 2}
    if N in table:
        return table[N]
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def critical_q(N: int) -> float:
    """Upper bound ``(N+2)/(N-2)_+`` on ``q`` for the variational construction."""
    return math.inf if N <= 2 else (N + 2.0) / (N - 2.0)
