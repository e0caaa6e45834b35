import math

import numpy as np
import pytest
from scipy.integrate._ivp import rk

from ksprofile.errors import StepUnderflow
from ksprofile.integrators import A, B4, B5, C, E, Stepper, hermite, hermite_root, rk_step


def test_tableau_matches_scipy_rk45():
    assert np.allclose(C[:6], rk.RK45.C, rtol=0, atol=1e-16)
    assert np.allclose(A[:6, :5], rk.RK45.A[:, :5], rtol=0, atol=1e-15)
    assert np.allclose(B5[:6], rk.RK45.B, rtol=0, atol=1e-16)
    # scipy stores B4 - B5; only the magnitude enters the error norm
    assert np.allclose(E, -rk.RK45.E, rtol=0, atol=1e-16)


def test_weights_are_consistent():
    assert B5.sum() == pytest.approx(1.0, abs=1e-15)
    assert B4.sum() == pytest.approx(1.0, abs=1e-15)
    for i in range(1, 7):
        assert A[i].sum() == pytest.approx(C[i], abs=1e-14)


def test_single_step_is_fifth_order():
    f = lambda t, y: np.array([y[0]])  # noqa: E731
    errs = []
    for h in (0.1, 0.05):
        y, _ = rk_step(f, 0.0, np.array([1.0]), h), None
        errs.append(abs(y[0] - math.exp(h)))
    # local error is O(h^6)
    assert errs[0] / errs[1] == pytest.approx(64.0, rel=0.1)


@pytest.mark.parametrize("componentwise", [False, True])
def test_stepper_harmonic_oscillator(componentwise):
    st = Stepper(lambda t, y: np.array([y[1], -y[0]]), 0.0, [0.0, 1.0], rtol=1e-11,
                 atol=1e-14, componentwise=componentwise)
    while st.t < 10.0:
        st.step(10.0)
    assert st.t == 10.0
    assert st.y[0] == pytest.approx(math.sin(10.0), abs=1e-9)
    assert st.y[1] == pytest.approx(math.cos(10.0), abs=1e-9)


def test_stepper_backwards():
    st = Stepper(lambda t, y: np.array([y[0]]), 1.0, [math.e], rtol=1e-12, atol=1e-14,
                 direction=-1.0)
    while st.t > 0.0:
        st.step(0.0)
    assert st.y[0] == pytest.approx(1.0, rel=1e-10)


def test_stepper_respects_cap():
    st = Stepper(lambda t, y: np.zeros(1), 0.0, [1.0], max_step=lambda t: 0.1 * (1 + t))
    t_prev = 0.0
    for _ in range(20):
        st.step(100.0)
        assert st.t - t_prev <= 0.1 * (1 + t_prev) + 1e-15
        t_prev = st.t


def test_stepper_underflow_at_singularity():
    # y' = y^2, y(0) = 1 blows up at t = 1
    st = Stepper(lambda t, y: y * y, 0.0, [1.0], rtol=1e-10, atol=1e-12)
    with pytest.raises(StepUnderflow):
        for _ in range(100000):
            st.step(2.0)
    assert st.t == pytest.approx(1.0, abs=1e-3)


def test_hermite_reproduces_cubic():
    p = np.poly1d([1.0, -2.0, 0.5, 3.0])
    dp = p.deriv()
    t = np.linspace(0.2, 1.3, 7)
    got = hermite(0.2, np.array([p(0.2)]), np.array([dp(0.2)]),
                  1.3, np.array([p(1.3)]), np.array([dp(1.3)]), t)
    assert np.allclose(got[:, 0], p(t), atol=1e-13)


def test_hermite_root_linear():
    root = hermite_root(0.0, np.array([1.0]), np.array([-1.0]),
                        2.0, np.array([-1.0]), np.array([-1.0]))
    assert root == pytest.approx(1.0, abs=1e-14)
