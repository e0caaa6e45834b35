"""Outcome bisection for the critical shooting parameter.

For ``kappa >= -N/2`` small parameters give global profiles and large ones
blow up; the threshold separates the two.  For ``kappa < -N/2`` small
parameters touch zero; the threshold is the lower edge of the non-touching
set and carries the profile with Gaussian (weighted-L2) decay.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .errors import InvalidBracket, MaxIterExceeded, NoCriticalValue, StepUnderflow
from .ode import Outcome, OutcomeKind, ProfileControls, ProfileSolution, integrate_profile
from .model import ModelParams

DEFAULT_TOL_REL = 1e-10
DEFAULT_MAX_ITER = 200
MAX_EXPANSION = 2 ** 40


def solve(params: ModelParams, lam: float, controls: ProfileControls | None = None) -> ProfileSolution:
    """``integrate_profile`` that returns the partial solution on step underflow."""
    try:
        return integrate_profile(params, lam, controls)
    except StepUnderflow as exc:
        if exc.partial is None:
            raise
        return exc.partial


def classify_lambda(params: ModelParams, lam: float,
                    controls: ProfileControls | None = None) -> Outcome:
    return solve(params, lam, controls).outcome


def low_side_kind(params: ModelParams) -> OutcomeKind:
    """Outcome expected below the threshold in this kappa regime."""
    if params.kappa >= -params.N / 2.0:
        return OutcomeKind.GLOBAL
    return OutcomeKind.TOUCH_ZERO


@dataclass
class CriticalResult:
    lambda_star: float
    bracket: tuple[float, float]
    outcome_lo: Outcome
    outcome_hi: Outcome
    iterations: int
    profiles: tuple[ProfileSolution, ProfileSolution]
    trace: list[tuple[float, Outcome]] = field(default_factory=list)
    controls: ProfileControls = field(default_factory=ProfileControls)
    tol_rel: float = DEFAULT_TOL_REL

    def report(self) -> dict:
        return {
            "lambda_star": self.lambda_star,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "endpoint_outcomes": {
                "lo": {"kind": self.outcome_lo.kind.value, "radius": self.outcome_lo.radius},
                "hi": {"kind": self.outcome_hi.kind.value, "radius": self.outcome_hi.radius},
            },
            "controls": dict(asdict(self.controls), tol_rel=self.tol_rel),
        }

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2, sort_keys=True)


def _is_low(sol: ProfileSolution, low: OutcomeKind) -> bool:
    return sol.outcome.kind is low


def _check_high(sol: ProfileSolution, low: OutcomeKind, where: str):
    # above the threshold of the kappa >= -N/2 regime only blow-up may occur
    if low is OutcomeKind.GLOBAL and sol.outcome.kind is not OutcomeKind.BLOW_UP:
        raise InvalidBracket(f"{where} endpoint gave {sol.outcome}, expected blow-up")


def expand_bracket(params, lo, hi, controls=None):
    """Halve ``lo`` / double ``hi`` until the endpoint outcomes differ."""
    low = low_side_kind(params)
    start = lo
    sol_lo = solve(params, lo, controls)
    while not _is_low(sol_lo, low):
        lo *= 0.5
        if lo < start / MAX_EXPANSION:
            raise InvalidBracket("no low-side outcome found while halving lambda_lo")
        sol_lo = solve(params, lo, controls)
    sol_hi = solve(params, hi, controls)
    while _is_low(sol_hi, low) or (low is OutcomeKind.GLOBAL
                                   and sol_hi.outcome.kind is not OutcomeKind.BLOW_UP):
        hi *= 2.0
        if hi > lo * MAX_EXPANSION:
            raise InvalidBracket("no blow-up found while doubling lambda_hi")
        sol_hi = solve(params, hi, controls)
    return (lo, sol_lo), (hi, sol_hi)


def find_critical_lambda(params: ModelParams, bracket0=(0.01, 100.0),
                         tol_rel: float = DEFAULT_TOL_REL, max_iter: int = DEFAULT_MAX_ITER,
                         controls: ProfileControls | None = None,
                         expand: bool = False) -> CriticalResult:
    """Bisect on the trajectory outcome until ``hi - lo <= tol_rel * mid``.

    Raises
    ------
    NoCriticalValue
        For ``q = 1`` (every parameter is global).
    InvalidBracket
        If the endpoints do not straddle the threshold (and ``expand`` is off).
    MaxIterExceeded
        If ``max_iter`` halvings do not reach ``tol_rel``.
    """
    if params.q == 1.0:
        raise NoCriticalValue("q = 1: the profile is global for every lambda > 0")
    controls = controls or ProfileControls()
    lo, hi = map(float, bracket0)
    if not 0 < lo < hi:
        raise InvalidBracket(f"need 0 < lo < hi, got ({lo}, {hi})")
    low = low_side_kind(params)
    if expand:
        (lo, sol_lo), (hi, sol_hi) = expand_bracket(params, lo, hi, controls)
    else:
        sol_lo, sol_hi = solve(params, lo, controls), solve(params, hi, controls)
        if _is_low(sol_lo, low) == _is_low(sol_hi, low) or not _is_low(sol_lo, low):
            raise InvalidBracket(
                f"bracket endpoints give {sol_lo.outcome} and {sol_hi.outcome}; "
                f"need {low.value} below and a different outcome above")
        _check_high(sol_hi, low, "upper")
    trace = [(lo, sol_lo.outcome), (hi, sol_hi.outcome)]
    iterations = 0
    while hi - lo > tol_rel * 0.5 * (lo + hi):
        if iterations >= max_iter:
            raise MaxIterExceeded(f"bracket [{lo}, {hi}] after {iterations} iterations")
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        sol = solve(params, mid, controls)
        trace.append((mid, sol.outcome))
        if _is_low(sol, low):
            lo, sol_lo = mid, sol
        else:
            hi, sol_hi = mid, sol
        iterations += 1
    return CriticalResult(lambda_star=0.5 * (lo + hi), bracket=(lo, hi),
                          outcome_lo=sol_lo.outcome, outcome_hi=sol_hi.outcome,
                          iterations=iterations, profiles=(sol_lo, sol_hi), trace=trace,
                          controls=controls, tol_rel=tol_rel)


def trace_is_monotone(trace, low: OutcomeKind) -> bool:
    """True when every low-side parameter lies below every other parameter."""
    lows = [lam for lam, out in trace if out.kind is low]
    highs = [lam for lam, out in trace if out.kind is not low]
    return not lows or not highs or max(lows) < min(highs)
