import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from shearband.errors import BudgetExceeded, EventNotFound, NonFinite, StepUnderflow, ValidationError
from shearband.integrate import Event, IntegratorConfig, integrate, integrate_to_event
from shearband.pqr import equilibrium_point, make_field

TIGHT = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12)


def test_linear_decay():
    traj = integrate(lambda t, x: -x, [1.0], (0.0, 1.0), TIGHT)
    assert traj.x_final[0] == pytest.approx(math.exp(-1.0), abs=1e-8)
    assert traj.t_final == 1.0


def test_backward_direction():
    cfg = TIGHT.replace(direction="backward")
    traj = integrate(lambda t, x: -x, [1.0], (0.0, -1.0), cfg)
    assert traj.x_final[0] == pytest.approx(math.e, rel=1e-8)
    assert np.all(np.diff(traj.t) < 0)


def test_equilibrium_stays_put():
    n, lam = 0.3, 2.0
    m1 = equilibrium_point("M1", n, lam)
    traj = integrate(make_field(n, lam), m1, (0.0, 10.0), TIGHT)
    assert np.max(np.abs(traj.x - m1)) < 1e-14


def test_oscillator_energy_drift():
    f = lambda t, x: np.array([x[1], -x[0]])
    T = 2 * math.pi * 100
    traj = integrate(f, [1.0, 0.0], (0.0, T), TIGHT.replace(h_max=1.0))
    energy = 0.5 * np.sum(traj.x**2, axis=1)
    assert np.max(np.abs(energy - 0.5)) < 1e-7
    np.testing.assert_allclose(traj.x_final, [math.cos(T), -math.sin(T)], atol=1e-6)


def test_matches_scipy_reference():
    f = lambda t, x: np.array([x[1], (1 - x[0] ** 2) * x[1] - x[0]])
    ours = integrate(f, [2.0, 0.0], (0.0, 10.0), TIGHT)
    ref = solve_ivp(f, (0.0, 10.0), [2.0, 0.0], method="DOP853", rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(ours.x_final, ref.y[:, -1], rtol=1e-7, atol=1e-8)


def test_dense_output_between_nodes():
    traj = integrate(lambda t, x: np.array([math.cos(t)]), [0.0], (0.0, 5.0), TIGHT.replace(h_max=0.5))
    tt = np.linspace(0, 5, 333)
    np.testing.assert_allclose(traj(tt)[:, 0], np.sin(tt), atol=1e-8)
    with pytest.raises(ValueError):
        traj(6.0)


def test_event_location():
    x, t = integrate_to_event(lambda t, x: np.array([1.0]), [0.0], TIGHT, lambda t, x: x[0] - 2.0)
    assert t == pytest.approx(2.0, abs=1e-10)
    assert x[0] == pytest.approx(2.0, abs=1e-10)


def test_event_not_found():
    with pytest.raises(EventNotFound):
        integrate_to_event(lambda t, x: -x, [1.0], TIGHT, lambda t, x: x[0] - 2.0, t_max=50.0)


def test_event_direction_filter():
    f = lambda t, x: np.array([math.cos(t)])
    falling = Event(lambda t, x: x[0] - 0.5, terminal=True, direction=-1)
    traj = integrate(f, [0.0], (0.0, 10.0), TIGHT, events=[falling])
    assert traj.status == "event"
    assert traj.t_final == pytest.approx(math.pi - math.asin(0.5), abs=1e-9)


def test_nonterminal_events_recorded():
    ev = Event(lambda t, x: math.sin(t), terminal=False, name="zero")
    # sign changes are detected per step, so steps must be shorter than the spacing
    traj = integrate(lambda t, x: np.zeros(1), [0.0], (0.0, 10.0), TIGHT.replace(h_max=0.5), events=[ev])
    locs = [r.t for r in traj.events]
    np.testing.assert_allclose(locs, [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-9)


def test_budget_and_underflow():
    with pytest.raises(BudgetExceeded):
        integrate(lambda t, x: -x, [1.0], (0.0, 100.0), TIGHT.replace(max_steps=3, h_max=0.1))
    stiff = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, h_init=1e-3, h_min=1e-3)
    with pytest.raises(StepUnderflow):
        integrate(lambda t, x: x**2, [1.0], (0.0, 2.0), stiff)


def test_non_finite():
    with pytest.raises(NonFinite):
        integrate(lambda t, x: -x, [math.nan], (0.0, 1.0))


def test_config_validation():
    with pytest.raises(ValidationError):
        IntegratorConfig(rel_tol=0.5)
    with pytest.raises(ValidationError):
        IntegratorConfig(direction="sideways")
    with pytest.raises(ValidationError):
        integrate(lambda t, x: -x, [1.0], (0.0, -1.0))


def test_replay_is_deterministic():
    f = lambda t, x: np.array([x[1], -math.sin(x[0])])
    a = integrate(f, [1.0, 0.0], (0.0, 20.0), TIGHT)
    b = integrate(f, [1.0, 0.0], (0.0, 20.0), TIGHT, steps=a.t)
    c = integrate(f, [1.0, 0.0], (0.0, 20.0), TIGHT, steps=a.t)
    np.testing.assert_array_equal(b.x, c.x)
    np.testing.assert_allclose(b.x, a.x, atol=1e-12)


@given(st.floats(-3.0, 3.0), st.floats(0.1, 4.0))
@settings(max_examples=25, deadline=None)
def test_exponential_growth_property(rate, T):
    traj = integrate(lambda t, x: rate * x, [1.0], (0.0, T), TIGHT)
    assert traj.x_final[0] == pytest.approx(math.exp(rate * T), rel=1e-8)
