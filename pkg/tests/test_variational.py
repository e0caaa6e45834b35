import json
import math

import numpy as np
import pytest

from ksprofile import (GridControls, ModelParams, cross_check_with_shooting, energy,
                       minimize_constrained, multiplier_from_eigenfunction)
from ksprofile.errors import (DegenerateDenominator, ExponentOutOfRange, ValidationError,
                              WrongRegime)
from ksprofile.variational import Discretization, state_from_profile


@pytest.fixture(scope="module")
def disc(params_a15):
    return Discretization(params_a15)


def test_zero_function(params_a15, disc):
    assert energy(np.zeros(disc.r.size), params_a15) == (0.0, 0.0)


def test_gaussian_energy_closed_form(params_a15, disc):
    # I0 = int exp(-r^2/4) = sqrt(pi), I2 = int r^2 exp(-r^2/4) = 2 sqrt(pi)
    I0, I2 = math.sqrt(math.pi), 2.0 * math.sqrt(math.pi)
    expected = 0.5 * (I2 / 4.0 + params_a15.kappa * I0)
    J, _ = energy(np.exp(-disc.r ** 2 / 4.0), params_a15)
    assert J == pytest.approx(expected, rel=1e-10)


def test_homogeneity(params_a15, disc):
    phi = np.exp(-disc.r ** 2 / 3.0) * (1 + disc.r)
    J1, H1 = energy(phi, params_a15)
    J2, H2 = energy(2.0 * phi, params_a15)
    assert J2 == pytest.approx(4.0 * J1, rel=1e-13)
    assert H2 == pytest.approx(2.0 ** (params_a15.q + 1) * H1, rel=1e-13)


def test_energy_shape_check(params_a15):
    with pytest.raises(ValidationError):
        energy(np.ones(10), params_a15)


def _random_directions(n, count, seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 1.0, n)
    for _ in range(count):
        c = rng.normal(size=6)
        yield sum(ck * np.cos((k + 0.5) * math.pi * x) for k, ck in enumerate(c)) \
            + 1e-3 * rng.normal(size=n)


def test_gradients_match_finite_differences(disc):
    w = disc.to_w(np.exp(-disc.r ** 2 / 3.0) * (1.0 + disc.r))
    gJ, gH = disc.grad_J(w), disc.grad_H(w)
    for v in _random_directions(w.size, 20, seed=7):
        eps = 1e-4 * np.linalg.norm(w) / np.linalg.norm(v)
        fdJ = (disc.J(w + eps * v) - disc.J(w - eps * v)) / (2 * eps)
        fdH = (disc.H(w + eps * v) - disc.H(w - eps * v)) / (2 * eps)
        assert abs(fdJ - gJ @ v) <= 1e-6 * abs(fdJ)
        assert abs(fdH - gH @ v) <= 1e-6 * abs(fdH)


def test_regime_guards():
    with pytest.raises(WrongRegime):
        minimize_constrained(ModelParams.create(1, alpha=2.0))
    with pytest.raises(ExponentOutOfRange):
        minimize_constrained(ModelParams.create(3, 1.0, 1.0, 4.2, 0.8))  # q = 5


def test_grid_controls_validation():
    with pytest.raises(ValidationError):
        GridControls(R_cut=0.0)
    with pytest.raises(ValidationError):
        GridControls(nodes=3)


def test_minimizer(var_a15):
    assert var_a15.converged
    assert abs(var_a15.H_val - 1.0) < 1e-8
    assert var_a15.M_star > 0
    assert np.all(var_a15.phi_star >= 0)
    hist = np.array(var_a15.J_history)
    assert np.all(np.diff(hist) < 0)


def test_two_multiplier_estimates_agree(var_a15):
    assert var_a15.M_star == pytest.approx(var_a15.M_descent, rel=1e-3)
    assert var_a15.M_star == pytest.approx(var_a15.M_energy, rel=1e-3)


def test_resolution_independence(params_a15, var_a15):
    coarse = minimize_constrained(params_a15, GridControls(nodes=2000))
    assert coarse.M_star == pytest.approx(var_a15.M_star, rel=1e-2)


def test_scaled_initial_guess(params_a15, var_a15, disc):
    other = minimize_constrained(params_a15, initial=10.0 * var_a15.phi_star)
    assert np.max(np.abs(other.phi_star - var_a15.phi_star)) < 1e-6 * var_a15.phi_star.max()
    assert other.M_star == pytest.approx(var_a15.M_star, rel=1e-8)


def test_other_dimension():
    p = ModelParams.create(3, 1.0, 1.0, 1.0, 0.8)  # kappa = -5/2, q = 1.8
    state = minimize_constrained(p)
    assert state.converged and state.M_star > 0


def test_multiplier_guards(params_a15, var_a15):
    from dataclasses import replace
    with pytest.raises(DegenerateDenominator):
        multiplier_from_eigenfunction(replace(var_a15, phi_star=0 * var_a15.phi_star),
                                      params_a15)
    with pytest.raises(WrongRegime):
        multiplier_from_eigenfunction(var_a15, ModelParams.create(2, alpha=1.0, kappa=-1.0))


def test_identity_fixture(params_a15, crit_a15):
    lo = crit_a15.profiles[0]
    disc = Discretization(params_a15)
    phi = np.where(disc.r <= lo.r_end, lo(np.minimum(disc.r, lo.r_end)), 0.0)
    state = state_from_profile(phi, crit_a15.lambda_star, params_a15)
    out = cross_check_with_shooting(state, params_a15, crit_a15.lambda_star)
    assert out["mismatch"] < 1e-12


def test_cross_check(params_a15, var_a15, crit_a15):
    out = cross_check_with_shooting(var_a15, params_a15, crit_a15.lambda_star)
    assert out["mismatch"] < 2e-2


def test_reports(var_a15):
    data = json.loads(var_a15.to_json())
    assert set(data) == {"J", "H", "M_star", "el_residual", "R_cut", "nodes"}
    lines = var_a15.to_csv().splitlines()
    assert lines[0] == "r,phi" and len(lines) == var_a15.grid.size + 1
