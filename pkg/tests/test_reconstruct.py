import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shearband.errors import DomainError, ExtrapolationError
from shearband.model import lambda_upper_bound, validate
from shearband.reconstruct import (
    fields_at,
    fields_at_time,
    fit_growth_exponent,
    focusing_exponent,
    frames,
    origin_second_differences,
    origin_width,
    pqr_from_tilde,
    profile_ode_residual,
    richardson_origin,
    tail_slopes,
    taylor_coefficients,
    tilde_from_pqr,
    time_exponents,
)


def series_taylor(n, lam, g0=1.0):
    """Second derivatives at the origin from a power-series solution of the profile ODEs."""
    r0 = 1 + 2 * lam / (2 - n)
    u0 = r0 * g0
    s0 = u0**n / g0
    # momentum balance at O(xi): 2 lam u0/(2-n) = s0 (n u2/u0 - g2/g0), kinematics: u2 = g2 (r0 + 2 lam)
    g2 = (2 * lam * u0 / (2 - n)) / (s0 * (n * (r0 + 2 * lam) / u0 - 1 / g0))
    return g2, g2 * (r0 + 2 * lam)


@given(st.floats(1e-3, 10), st.just(0.0) | st.floats(1e-8, 5), st.floats(1e-3, 8), st.floats(0.05, 0.95))
@settings(max_examples=150)
def test_tilde_round_trip(p, q, r, n):
    vt, gt, st_, ut = tilde_from_pqr(p, q, r, n)
    assert ut == pytest.approx(r * gt, rel=1e-13)
    back = pqr_from_tilde(vt, gt, st_, ut, n=n)
    np.testing.assert_allclose(back, [p, q, r], rtol=1e-12)


def test_zero_q_gives_zero_velocity():
    assert tilde_from_pqr(1.0, 0.0, 2.0, 0.3)[0] == 0.0


def test_tilde_domain():
    with pytest.raises(DomainError):
        tilde_from_pqr(0.0, 1.0, 1.0, 0.3)


def test_richardson_exact_on_even_quartic():
    xi = np.array([0.01, 0.02, 0.035])
    assert richardson_origin(xi, 2.0 - 3.0 * xi**2 + 5.0 * xi**4) == pytest.approx(2.0, abs=1e-13)


def test_taylor_matches_series():
    for n, lam in [(0.3, 2.0), (0.05, 10.0), (0.6, 0.3)]:
        np.testing.assert_allclose(taylor_coefficients(validate(n, lam=lam)), series_taylor(n, lam), rtol=1e-12)
    g2, u2 = taylor_coefficients(validate(0.3, lam=2.0))
    assert g2 == pytest.approx(-16.0417, abs=1e-4)
    assert u2 / g2 == pytest.approx(1 + 4 / 1.7 + 4.0, rel=1e-14)


def singular_lambda(n):
    """Root of the Taylor denominator ``n (r0 + 2 lam) / r0 - 1``, or inf."""
    d = n * (2 - n) - (1 - n)
    return (1 - n) * (2 - n) / (2 * d) if d > 0 else np.inf


def test_taylor_coefficients_negative_on_grid():
    checked = 0
    for n in np.linspace(0.05, 0.9, 8):
        lam_sing = singular_lambda(n)
        for f in np.linspace(0.05, 0.95, 8):
            lam = f * lambda_upper_bound(n)
            if lam < lam_sing - 1e-3:
                g2, u2 = taylor_coefficients(validate(n, lam=lam))
                assert g2 < 0 and u2 < 0
                checked += 1
    assert checked > 40


def test_taylor_singular_value():
    n = 0.9
    with pytest.raises(DomainError):
        taylor_coefficients(validate(n, lam=singular_lambda(n)))


def test_time_exponents_fig4_values():
    ex = time_exponents(validate(0.05, lam=10.0))
    assert ex["sigma"] == pytest.approx(-10.7436, abs=1e-4)
    assert ex["gamma"] == pytest.approx(1 + 20 / 1.95)
    assert ex["u"] == pytest.approx(20 / 1.95)


def test_focusing_exponent():
    p = validate(0.3, lam=2.0)
    assert focusing_exponent(p) == pytest.approx(1 - 0.6 / (1.7 * 0.7))


def test_fit_growth_exponent_exact():
    t = np.array([0.0, 0.5, 1.0])
    assert fit_growth_exponent(t, 3 * (1 + t / 2.0) ** 4.5, gamma0=2.0) == pytest.approx(4.5)


class TestFig3Profile:
    def test_origin_values(self, fig3_profile, fig3_params):
        o = fig3_profile.origin
        assert o["gamma_bar"] == pytest.approx(fig3_params.gamma_bar0, rel=5e-3)
        assert o["u_bar"] == pytest.approx(fig3_params.u_bar0, rel=5e-3)
        assert o["sigma_bar"] == pytest.approx(fig3_params.sigma_bar0, rel=5e-3)
        # far tighter in practice
        assert o["gamma_bar"] == pytest.approx(fig3_params.gamma_bar0, rel=1e-7)

    def test_positivity(self, fig3_profile):
        pr = fig3_profile
        for arr in (pr.gamma_bar, pr.sigma_bar, pr.u_bar):
            assert np.all(arr > 0)
        assert np.all(pr.v_bar >= 0)
        assert pr.evaluate(np.array([0.0]))[0][0] == 0.0

    def test_second_differences(self, fig3_profile):
        g2, u2 = fig3_profile.taylor
        dg, du = origin_second_differences(fig3_profile)
        assert dg == pytest.approx(g2, rel=1e-2)
        assert du == pytest.approx(u2, rel=1e-2)
        h = 0.01 * origin_width(fig3_profile)
        dg0, du0 = origin_second_differences(fig3_profile, h, extrapolate=False)
        assert abs(dg0 / g2 - 1) < 1e-2

    def test_tails(self, fig3_profile):
        s = tail_slopes(fig3_profile)
        assert s["gamma_bar"] == pytest.approx(-1 / 0.7, rel=0.02)
        assert s["u_bar"] == pytest.approx(-1 / 0.7, rel=0.02)
        assert s["sigma_bar"] == pytest.approx(1.0, rel=0.02)

    def test_ode_residual(self, fig3_profile):
        res = profile_ode_residual(fig3_profile)
        assert res["momentum"] < 1e-6 and res["kinematic"] < 1e-6 and res["constitutive"] < 1e-12

    def test_evaluate_continuity_and_range(self, fig3_profile):
        pr = fig3_profile
        lo = pr.xi_min
        below = np.array(pr.evaluate(np.array([lo * (1 - 1e-9)])))
        above = np.array(pr.evaluate(np.array([lo * (1 + 1e-9)])))
        np.testing.assert_allclose(below, above, rtol=1e-6)
        with pytest.raises(DomainError):
            pr.evaluate(np.array([-1.0]))
        with pytest.raises(ExtrapolationError):
            pr.evaluate(np.array([pr.xi_max * 10]))

    def test_evaluate_matches_samples(self, fig3_profile):
        pr = fig3_profile
        idx = np.arange(10, pr.xi.size - 10, 97)
        vals = pr.evaluate(pr.xi[idx])
        for got, ref in zip(vals, (pr.v_bar, pr.gamma_bar, pr.sigma_bar, pr.u_bar)):
            np.testing.assert_allclose(got, ref[idx], rtol=1e-8)

    def test_initial_frame_is_profile(self, fig3_profile):
        x = np.linspace(-0.5, 0.5, 11)
        fr = fields_at(fig3_profile, x, 0.0)
        v, g, s, u = fig3_profile.evaluate(np.abs(x))
        np.testing.assert_allclose(fr.gamma, g, rtol=1e-14)
        np.testing.assert_allclose(fr.u, u, rtol=1e-14)
        np.testing.assert_allclose(fr.v, np.sign(x) * v, rtol=1e-14)
        np.testing.assert_allclose(fr.sigma, s, rtol=1e-14)

    def test_centre_growth(self, fig3_profile, fig3_params):
        ts = np.array([0.0, 0.1, 0.3])
        gam = [fields_at(fig3_profile, np.array([0.0]), t).gamma[0] for t in ts]
        expected = fig3_params.gamma0 * fig3_params.gamma_bar0 * (1 + ts) ** (1 + 4 / 1.7)
        np.testing.assert_allclose(gam, expected, rtol=1e-6)

    def test_frames_helpers(self, fig3_profile):
        fr = fields_at_time(fig3_profile, 0.2, num=21, half_width=0.3)
        assert fr.x.size == 21 and fr.as_array().shape == (21, 5)
        assert len(frames(fig3_profile, [0.0, 0.1], num=11, half_width=0.2)) == 2
        with pytest.raises(DomainError):
            fields_at(fig3_profile, np.zeros(1), -1.0)
