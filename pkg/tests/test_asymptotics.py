import numpy as np
import pytest

from ksprofile import (ModelParams, Outcome, OutcomeKind, ProfileSolution, fit_rate,
                       integrate_profile, weighted_decay_check)
from ksprofile.asymptotics import weighted_metric
from ksprofile.errors import NotGlobal


def _synthetic(params, r, phi, dphi, kind=OutcomeKind.GLOBAL):
    return ProfileSolution(0.1, r, phi, dphi, Outcome(kind, float(r[-1])), params)


def test_constant_profile_plateau():
    flat = ModelParams.create(2, 1.0, 1.0, 1.0, 0.5)
    fit = fit_rate(integrate_profile(flat, 0.0))
    assert fit.M_star == pytest.approx(1.0, abs=1e-10)
    assert fit.plateau_defect < 1e-10
    assert fit.converged


def test_synthetic_power_law(params_a2):
    r = np.linspace(0.5, 40.0, 4000)
    phi = 3.0 * r ** -1.0 * (1.0 + 1.0 / r)
    dphi = -3.0 * r ** -2.0 - 6.0 * r ** -3.0
    fit = fit_rate(_synthetic(params_a2, r, phi, dphi))
    assert fit.M_star == pytest.approx(3.0, rel=0.05)
    # g = 3 (1 + 1/r) drifts by 1/ra - 1/rb across the window and the defect
    # is measured from its centre
    ra, rb = fit.window
    spread = (1.0 / ra - 1.0 / rb) / (1.0 + 1.0 / ra)
    assert 0.4 * spread < fit.plateau_defect < 0.6 * spread
    assert fit.plateau_defect < 1.0 / ra
    assert fit.C1 <= fit.M_star <= fit.C2


def test_fit_needs_global(params_a2):
    sol = integrate_profile(params_a2, 100.0)
    with pytest.raises(NotGlobal):
        fit_rate(sol)


def test_small_lambda_plateau(half_a2, crit_a2):
    fit = fit_rate(half_a2, lambda_star=crit_a2.lambda_star)
    assert fit.converged and fit.M_star > 0
    assert fit.window == pytest.approx((24.0, 36.0))
    assert not fit.outside_proven_regime
    assert fit.C2 / fit.C1 < 1.03


def test_near_critical_is_flagged(crit_a2):
    lo = crit_a2.profiles[0]
    fit = fit_rate(lo, lambda_star=crit_a2.lambda_star)
    assert fit.outside_proven_regime


def test_metric_of_gaussian():
    r = np.linspace(1.0, 20.0, 100)
    m = weighted_metric(r, np.exp(-r * r / 4.0), 1, 1.0)
    assert np.allclose(m, -r * r / 8.0, atol=1e-12)
    assert np.all(np.diff(m) < 0)


def test_metric_of_power_law_increases(params_a15):
    r = np.linspace(1.0, 40.0, 400)
    sol = _synthetic(params_a15, r, r ** -2.0, -2.0 * r ** -3.0)
    assert not weighted_decay_check(sol).monotone_decreasing


def test_near_critical_very_singular_decays(crit_a15):
    lo = crit_a15.profiles[0]
    assert weighted_decay_check(lo).monotone_decreasing


def test_plateau_matches_oracle_tail(params_a2, goldens):
    gold = goldens["global_N1_alpha2_lam0.05"]
    sol = integrate_profile(params_a2, 0.05)
    phi29, _ = sol.evaluate([29.0])
    assert 29.0 * phi29[0] == pytest.approx(gold["tail_constant"], rel=1e-7)
    fit = fit_rate(sol)
    assert fit.converged
    assert fit.M_star == pytest.approx(gold["tail_constant"], rel=fit.plateau_defect)
