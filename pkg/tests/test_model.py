import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shearband.errors import ConstraintViolation, DomainError, Overdetermined, ValidationError
from shearband.model import (
    RescaleMap,
    UniformShear,
    lambda_from_data,
    lambda_upper_bound,
    params_from_mapping,
    sigma_constitutive,
    t_of_tau,
    tau_of_t,
    validate,
)


def test_u_bar0_from_lambda():
    p = validate(0.3, lam=2.0, gamma_bar0=1.0)
    assert p.u_bar0 == pytest.approx(1.0 + 4.0 / 1.7, rel=1e-14)
    assert p.r0 == pytest.approx(3.3529411764705883, rel=1e-14)


def test_kappa_value():
    p = validate(0.3, lam=2.0)
    assert p.kappa == pytest.approx(p.u_bar0**0.7, rel=1e-14)
    assert p.kappa == pytest.approx(2.33237, abs=1e-5)


def test_uniform_data_rejected():
    with pytest.raises(ConstraintViolation):
        validate(0.4, gamma_bar0=1.0, u_bar0=1.0)


def test_lambda_above_bound_rejected():
    assert lambda_upper_bound(0.3) == pytest.approx(1.7 * 0.7 / 0.3)
    with pytest.raises(ConstraintViolation):
        validate(0.3, lam=4.0)


@pytest.mark.parametrize("n", [0.0, 1.0, -0.1, 1.5])
def test_n_out_of_range(n):
    with pytest.raises(ValidationError):
        validate(n, lam=0.1)


def test_overdetermined_inconsistent():
    with pytest.raises(Overdetermined):
        validate(0.3, lam=2.0, gamma_bar0=1.0, u_bar0=5.0)


def test_overdetermined_consistent_accepted():
    p = validate(0.3, lam=2.0, gamma_bar0=2.0, u_bar0=2.0 * (1 + 4 / 1.7))
    assert p.lam == pytest.approx(2.0)


def test_lambda_from_data_inverse():
    p = validate(0.2, lam=1.5, gamma_bar0=0.7)
    assert lambda_from_data(0.2, p.gamma_bar0, p.u_bar0) == pytest.approx(1.5, rel=1e-13)


def test_mapping_requires_n():
    with pytest.raises(ValidationError):
        params_from_mapping({"lambda": 1.0})
    assert params_from_mapping({"n": "0.3", "lambda": "2"}).lam == 2.0


@pytest.mark.parametrize(
    "gamma, gamma_t, n, expected",
    [(1.0, 1.0, 0.3, 1.0), (2.0, 1.0, 0.5, 0.5), (4.0, 9.0, 0.5, 0.75)],
)
def test_constitutive(gamma, gamma_t, n, expected):
    assert sigma_constitutive(gamma, gamma_t, n) == pytest.approx(expected, rel=1e-15)


def test_constitutive_rejects_nonpositive_strain():
    with pytest.raises(DomainError):
        sigma_constitutive(0.0, 1.0, 0.3)


def test_uniform_shear_stress():
    us = UniformShear(gamma0=0.5)
    t = np.linspace(0, 3, 7)
    np.testing.assert_allclose(us.sigma(t), 1.0 / (t + 0.5), rtol=1e-15)
    np.testing.assert_allclose(sigma_constitutive(us.gamma(t), 1.0, 0.3), us.sigma(t), rtol=1e-15)


def test_tau_values():
    assert tau_of_t(0.0, 1.0) == 0.0
    assert tau_of_t(math.e - 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert t_of_tau(tau_of_t(3.7, 0.5), 0.5) == pytest.approx(3.7, abs=1e-14)


@given(st.floats(0.0, 50.0), st.floats(0.05, 10.0))
def test_tau_round_trip(t, g0):
    assert t_of_tau(tau_of_t(t, g0), g0) == pytest.approx(t, rel=1e-12, abs=1e-12)


@given(st.floats(0.01, 0.95), st.floats(0.01, 0.99), st.floats(0.1, 10.0))
@settings(max_examples=60)
def test_admissible_params_consistent(n, frac, g0):
    lam = frac * lambda_upper_bound(n)
    p = validate(n, lam=lam, gamma_bar0=g0)
    assert p.u_bar0 > p.gamma_bar0 > 0
    assert lambda_from_data(n, p.gamma_bar0, p.u_bar0) == pytest.approx(lam, rel=1e-10)


@given(st.floats(0.05, 0.9), st.floats(0.1, 8.0))
@settings(max_examples=40)
def test_rescaling_keeps_lambda(n, A):
    p = validate(n, lam=0.5 * lambda_upper_bound(n))
    q = p.rescaled(A)
    assert q.lam == pytest.approx(p.lam, rel=1e-12)
    assert q.gamma_bar0 == pytest.approx(A ** (2 / (2 - n)), rel=1e-12)


def test_rescale_map_round_trip():
    m = RescaleMap(gamma0=1.3)
    t = 0.8
    u, g = np.array([1.2, 0.9]), np.array([2.0, 2.5])
    sig = u**0.3 / g
    U, G, S = m.to_relative(u, g, sig, t)
    u2, g2, s2 = m.from_relative(U, G, S, m.tau(t))
    np.testing.assert_allclose(u2, u, rtol=1e-14)
    np.testing.assert_allclose(g2, g, rtol=1e-14)
    np.testing.assert_allclose(s2, sig, rtol=1e-14)
    assert m.t(m.tau(t)) == pytest.approx(t, rel=1e-14)
    # relative constitutive law survives the change of variables
    np.testing.assert_allclose(S, U**0.3 / G, rtol=1e-14)
