"""Finite-difference checks in the relative-perturbation variables.

On ``x in [0, 1]`` with ``N + 1`` nodes::

    U_tau = Sigma_xx,   Gamma_tau = U - Gamma,   Sigma = U**n / Gamma,

with ``Sigma_x = 0`` at both ends, imposed through mirror ghost nodes. In
flux form the trapezoidal mean of ``U`` is conserved exactly. Time stepping
is classical RK4 under an explicit diffusion bound.

The module also evaluates the residual of reconstructed physical fields in
``u_t = (u**n / gamma)_xx`` and ``gamma_t = u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, PositivityLoss, ResolutionError, StabilityViolation
from .linstab import eigenvalues, eigenvector

STABILITY_FACTOR = 0.4
NONLINEAR_LIMIT = 0.1


@dataclass(frozen=True)
class PdeState:
    """Nodal ``U``, ``Gamma`` on a uniform grid of ``[0, 1]`` at time ``tau``."""

    n: float
    U: np.ndarray
    Gamma: np.ndarray
    tau: float = 0.0

    @property
    def N(self) -> int:
        return self.U.size - 1

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    @property
    def sigma(self) -> np.ndarray:
        return self.U**self.n / self.Gamma

    def mean_u(self) -> float:
        return trapezoid_mean(self.U)


def trapezoid_mean(f) -> float:
    f = np.asarray(f, dtype=float)
    return float((f.sum() - 0.5 * (f[0] + f[-1])) / (f.size - 1))


def second_difference_neumann(w, h: float) -> np.ndarray:
    """Central second difference with mirror ghosts (``w_x = 0`` at the ends)."""
    out = np.empty_like(w)
    out[1:-1] = w[2:] - 2.0 * w[1:-1] + w[:-2]
    out[0] = 2.0 * (w[1] - w[0])
    out[-1] = 2.0 * (w[-2] - w[-1])
    return out / (h * h)


def uniform_state(N: int, n: float) -> PdeState:
    return PdeState(n, np.ones(N + 1), np.ones(N + 1))


def mode_state(N: int, n: float, amplitude: float, j: int = 1, growing: bool = True) -> PdeState:
    """Uniform state plus ``amplitude`` times mode ``j``.

    With ``growing=True`` the perturbation follows the growing eigenvector
    ``(1 + lambda_plus, 1)`` of the mode; otherwise only ``U`` is perturbed.
    """
    x = np.linspace(0.0, 1.0, N + 1)
    c = np.cos(j * math.pi * x)
    if growing:
        lp, _ = eigenvalues(j, n)
        vec = eigenvector(lp)
        vec = vec / vec[1]
        U, G = 1.0 + amplitude * vec[0] * c, 1.0 + amplitude * c
    else:
        U, G = 1.0 + amplitude * c, np.ones_like(x)
    U = U - (trapezoid_mean(U) - 1.0)
    return PdeState(n, U, G)


def pde_rhs(U, Gamma, n: float, h: float):
    """Right-hand side ``(U_tau, Gamma_tau)``."""
    sigma = U**n / Gamma
    return second_difference_neumann(sigma, h), U - Gamma


def stability_bound(state: PdeState) -> float:
    """Largest admissible ``dtau = 0.4 h^2 / (n max(U^(n-1)/Gamma))``."""
    if state.n <= 0:
        raise DomainError("explicit stepping needs n > 0 (n = 0 is ill-posed)")
    stiff = state.n * float(np.max(state.U ** (state.n - 1.0) / state.Gamma))
    return STABILITY_FACTOR * state.h**2 / stiff


def _check_positive(U, G, tau):
    if np.any(U <= 0) or np.any(G <= 0):
        raise PositivityLoss(f"U or Gamma lost positivity at tau={tau:.6g}")
    if not (np.all(np.isfinite(U)) and np.all(np.isfinite(G))):
        raise PositivityLoss(f"non-finite field at tau={tau:.6g}")


def step_nonlinear(state: PdeState, dtau: float) -> PdeState:
    """One RK4 step of the nonlinear system.

    Raises
    ------
    StabilityViolation
        ``dtau`` above :func:`stability_bound`.
    PositivityLoss
        ``U`` or ``Gamma`` not positive after the step.
    """
    bound = stability_bound(state)
    if dtau > bound * (1.0 + 1e-12):
        raise StabilityViolation(f"dtau={dtau:.3g} exceeds the explicit bound {bound:.3g}")
    n, h = state.n, state.h
    U, G = state.U, state.Gamma
    k1u, k1g = pde_rhs(U, G, n, h)
    k2u, k2g = pde_rhs(U + 0.5 * dtau * k1u, G + 0.5 * dtau * k1g, n, h)
    k3u, k3g = pde_rhs(U + 0.5 * dtau * k2u, G + 0.5 * dtau * k2g, n, h)
    k4u, k4g = pde_rhs(U + dtau * k3u, G + dtau * k3g, n, h)
    U1 = U + dtau / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    G1 = G + dtau / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
    _check_positive(U1, G1, state.tau + dtau)
    return replace(state, U=U1, Gamma=G1, tau=state.tau + dtau)


def project_mode(f, j: int) -> float:
    """Cosine coefficient ``2 * mean(f cos(j pi x))`` with trapezoid weights."""
    f = np.asarray(f, dtype=float)
    x = np.linspace(0.0, 1.0, f.size)
    return 2.0 * trapezoid_mean(f * np.cos(j * math.pi * x))


@dataclass
class NonlinearRun:
    states: list
    taus: np.ndarray
    flag: str = "linear-regime"
    mean_drift: float = 0.0

    @property
    def final(self) -> PdeState:
        return self.states[-1]

    def amplitudes(self, j: int = 1) -> np.ndarray:
        return np.array([project_mode(s.U - 1.0, j) for s in self.states])


def run_nonlinear(
    state: PdeState,
    tau_end: float,
    dtau: float | None = None,
    limit: float = NONLINEAR_LIMIT,
    keep_every: int = 1,
) -> NonlinearRun:
    """Step to ``tau_end`` or until ``max|U - 1|`` exceeds ``limit``.

    Stopping on the limit sets ``flag = "nonlinear-regime"``; such runs are
    only meant for qualitative comparison.
    """
    m0 = state.mean_u()
    states, taus = [state], [state.tau]
    step = 0
    flag = "linear-regime"
    while state.tau < tau_end - 1e-15:
        dt = min(dtau or stability_bound(state), tau_end - state.tau)
        state = step_nonlinear(state, dt)
        step += 1
        if step % keep_every == 0 or state.tau >= tau_end - 1e-15:
            states.append(state)
            taus.append(state.tau)
        if float(np.max(np.abs(state.U - 1.0))) > limit:
            if states[-1] is not state:
                states.append(state)
                taus.append(state.tau)
            flag = "nonlinear-regime"
            break
    drift = max(abs(s.mean_u() - m0) for s in states)
    return NonlinearRun(states, np.array(taus), flag, drift)


def peak_width(U, level: float = 0.5) -> float:
    """Width near ``x = 0`` where ``U - min U`` exceeds ``level`` of its range."""
    U = np.asarray(U, dtype=float)
    x = np.linspace(0.0, 1.0, U.size)
    d = U - U.min()
    if d.max() <= 0:
        return 1.0
    above = d >= level * d.max()
    if not above[0]:
        return 0.0
    idx = np.flatnonzero(~above)
    return float(x[idx[0]]) if idx.size else 1.0


# -- linearised system -------------------------------------------------------------


def linear_rhs(Ut, Gt, n: float, h: float):
    """``(n U - G)_xx`` and ``U - G`` for the linearised perturbations."""
    return second_difference_neumann(n * Ut - Gt, h), Ut - Gt


@dataclass
class LinearRate:
    j: int
    n: float
    N: int
    measured: float
    predicted: float
    measured_decay: float = float("nan")
    taus: np.ndarray = field(repr=False, default=None)
    amplitudes: np.ndarray = field(repr=False, default=None)

    @property
    def rel_err(self) -> float:
        return abs(self.measured - self.predicted) / max(abs(self.predicted), 1e-300)

    def as_dict(self) -> dict:
        return {"j": self.j, "n": self.n, "N": self.N, "measured": self.measured,
                "predicted": self.predicted, "rel_err": self.rel_err,
                "measured_decay": self.measured_decay}


def propagator_rates(amplitudes: np.ndarray, dtau: float) -> np.ndarray:
    """Rates ``log(eig P) / dtau`` of the 2x2 map fitted to ``Z[k+1] = P Z[k]``.

    ``amplitudes`` has shape ``(m, 2)`` (projected ``U~`` and ``G~`` sampled
    every ``dtau``). Returned in decreasing order.
    """
    Z = np.asarray(amplitudes, dtype=float)
    Z0, Z1 = Z[:-1].T, Z[1:].T
    P = Z1 @ np.linalg.pinv(Z0)
    ev = np.linalg.eigvals(P)
    if np.any(np.abs(ev.imag) > 1e-10 * np.abs(ev).max()) or np.any(ev.real <= 0):
        raise DomainError("fitted mode propagator has no real positive spectrum")
    return np.sort(np.log(ev.real) / dtau)[::-1]


def run_linearized(j: int, n: float, tau_end: float = 0.25, N: int = 256, dtau: float | None = None,
                   samples: int = 50) -> LinearRate:
    """Measured growth rate of mode ``j`` in the linearised system.

    Seeds ``U~ = cos(j pi x)``, ``G~ = 0``, integrates to ``tau_end`` and
    records the projections of both fields on ``cos(j pi x)``. Because the
    cosine is an exact eigenfunction of the mirrored difference operator, the
    projections evolve under a fixed 2x2 map; it is fitted by least squares
    and its log-eigenvalues are the measured rates. This separates the growing
    and decaying branches without waiting for the latter to die out.

    Raises
    ------
    ResolutionError
        If ``N < 8 j``.
    """
    if j < 1:
        raise DomainError("mode index must be >= 1")
    if N < 8 * j:
        raise ResolutionError(f"N={N} under-resolves mode j={j}; need N >= {8 * j}")
    if n <= 0:
        raise DomainError("explicit stepping needs n > 0")
    h = 1.0 / N
    x = np.linspace(0.0, 1.0, N + 1)
    bound = STABILITY_FACTOR * h * h / n
    dt = min(dtau or bound, bound)
    stride = max(1, int(math.ceil(tau_end / samples / dt)))
    dt = tau_end / (samples * stride)
    U = np.cos(j * math.pi * x)
    G = np.zeros_like(U)
    taus, amps = [0.0], [(project_mode(U, j), project_mode(G, j))]
    for s in range(1, samples * stride + 1):
        k1u, k1g = linear_rhs(U, G, n, h)
        k2u, k2g = linear_rhs(U + 0.5 * dt * k1u, G + 0.5 * dt * k1g, n, h)
        k3u, k3g = linear_rhs(U + 0.5 * dt * k2u, G + 0.5 * dt * k2g, n, h)
        k4u, k4g = linear_rhs(U + dt * k3u, G + dt * k3g, n, h)
        U = U + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        G = G + dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
        if s % stride == 0:
            taus.append(s * dt)
            amps.append((project_mode(U, j), project_mode(G, j)))
    amps = np.array(amps)
    grow, decay = propagator_rates(amps, stride * dt)
    return LinearRate(j, n, N, float(grow), eigenvalues(j, n)[0], float(decay), np.array(taus), amps)


# -- residuals of reconstructed solutions --------------------------------------------


@dataclass(frozen=True)
class ResidualRow:
    t: float
    res_mom_Linf: float
    res_mom_L2: float
    res_kin_Linf: float
    res_kin_L2: float

    def as_tuple(self):
        return (self.t, self.res_mom_Linf, self.res_mom_L2, self.res_kin_Linf, self.res_kin_L2)


FieldFn = Callable[[np.ndarray, float], tuple]


def _rel(num, den):
    if den == 0.0:
        return float(num)
    return float(num / den)


def field_residual(fields: FieldFn, n: float, t_list: Sequence[float], x, dt_rel: float = 1e-4) -> list[ResidualRow]:
    """Residuals of ``u_t = (u^n/gamma)_xx`` and ``gamma_t = u`` by finite differences.

    ``fields(x, t)`` returns ``(u, gamma)``. Time derivatives are central over
    ``t +- dt_rel * t``; space derivatives are central on the uniform grid
    ``x``; norms are taken over interior nodes. The momentum residual is
    relative to ``max(|u_t|, |sigma_xx|)`` and the kinematic one to ``|u|``.
    """
    x = np.asarray(x, dtype=float)
    h = float(x[1] - x[0])
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0.0):
        raise DomainError("residual grid must be uniform")
    rows = []
    for t in t_list:
        t = float(t)
        if t <= 0:
            raise DomainError("residual times must be positive")
        t_plus, t_minus = t * (1.0 + dt_rel), t * (1.0 - dt_rel)
        span = t_plus - t_minus  # exactly representable stencil width
        u, g = fields(x, t)
        up, gp = fields(x, t_plus)
        um, gm = fields(x, t_minus)
        u_t = ((up - um) / span)[1:-1]
        g_t = ((gp - gm) / span)[1:-1]
        sig = u**n / g
        s_xx = (sig[2:] - 2.0 * sig[1:-1] + sig[:-2]) / (h * h)
        r_mom = u_t - s_xx
        r_kin = g_t - u[1:-1]
        rms = lambda a: float(np.sqrt(np.mean(a * a)))
        mom_inf = max(float(np.max(np.abs(u_t))), float(np.max(np.abs(s_xx))))
        mom_l2 = max(rms(u_t), rms(s_xx))
        rows.append(
            ResidualRow(
                t,
                _rel(np.max(np.abs(r_mom)), mom_inf),
                _rel(rms(r_mom), mom_l2),
                _rel(np.max(np.abs(r_kin)), float(np.max(np.abs(u[1:-1])))),
                _rel(rms(r_kin), rms(u[1:-1])),
            )
        )
    return rows


def default_window(profile, t_list, width_factor: float = 4.0) -> tuple[float, float]:
    """Symmetric window spanning ``width_factor`` profile widths at the latest time."""
    p = profile.params
    g2 = profile.taylor[0]
    w_xi = width_factor * math.sqrt(abs(p.gamma_bar0 / g2))
    s_max = 1.0 + max(t_list) / p.gamma0
    w = w_xi / s_max**p.lam
    return -w, w


def selfsimilar_residual(profile, t_list, x_window=None, cells: int = 1000, dt_rel: float = 1e-4) -> list[ResidualRow]:
    """PDE residuals of the reconstructed self-similar solution.

    Raises
    ------
    ExtrapolationError
        If the window leaves the profile's sampled range at some time.
    """
    from .reconstruct import fields_at

    if x_window is None:
        x_window = default_window(profile, t_list)
    x = np.linspace(x_window[0], x_window[1], cells + 1)

    def fn(xx, t):
        fr = fields_at(profile, xx, t)
        return fr.u, fr.gamma

    return field_residual(fn, profile.params.n, t_list, x, dt_rel)


def uniform_shear_residual(n: float, t_list, gamma0: float = 1.0, x_window=(0.0, 1.0), cells: int = 1000,
                           dt_rel: float = 1e-4) -> list[ResidualRow]:
    """Residuals of the exact uniform shearing state (should vanish)."""
    x = np.linspace(x_window[0], x_window[1], cells + 1)
    return field_residual(
        lambda xx, t: (np.ones_like(xx), np.full_like(xx, t + gamma0)), n, t_list, x, dt_rel
    )


def convergence_orders(coarse: Sequence[ResidualRow], fine: Sequence[ResidualRow], ratio: float = 2.0) -> dict:
    """Observed orders ``log(res_coarse/res_fine)/log(ratio)`` per column (worst over times)."""
    out = {}
    for name in ("res_mom_Linf", "res_mom_L2", "res_kin_Linf", "res_kin_L2"):
        orders = []
        for a, b in zip(coarse, fine):
            ra, rb = getattr(a, name), getattr(b, name)
            if ra > 0 and rb > 0:
                orders.append(math.log(ra / rb) / math.log(ratio))
        out[name] = min(orders) if orders else float("nan")
    return out


REFINEMENT_LADDER = ((100, 2e-2), (200, 1e-2), (400, 5e-3))


def refinement_study(profile, t_list, x_window=None, ladder=REFINEMENT_LADDER) -> dict:
    """Residuals under simultaneous grid and time-step halving.

    At fine grids the ``1/h^2`` amplification of rounding noise in the fields
    dominates, so the ladder stays coarse enough for truncation error to lead.
    Returns the residual rows per level and the observed orders between
    consecutive levels.
    """
    if x_window is None:
        x_window = default_window(profile, t_list)
    levels = [selfsimilar_residual(profile, t_list, x_window, cells, dt_rel) for cells, dt_rel in ladder]
    orders = []
    for (c0, _), (c1, _), a, b in zip(ladder, ladder[1:], levels, levels[1:]):
        orders.append(convergence_orders(a, b, ratio=c1 / c0))
    return {"ladder": [list(x) for x in ladder], "levels": levels, "orders": orders, "window": list(x_window)}
