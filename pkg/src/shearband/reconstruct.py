"""From the (p, q, r) orbit back to self-similar profiles and physical fields.

Profiles ``(V, G, S, U)`` (bars dropped in code) live on ``xi = e^eta >= 0``;
physical fields at time ``t`` follow from the similarity variable
``xi = |x| s**lam`` with ``s = 1 + t/gamma0``::

    v     = s**(lam n/(2-n))        * sign(x) V(xi)
    gamma = gamma0 s**(1 + 2lam/(2-n)) G(xi)
    sigma = s**(-1 - 2lam(1-n)/(2-n)) S(xi) / gamma0
    u     = s**(2lam/(2-n))          U(xi)

The stress exponent is also written ``-1 - lam(1 - n/(2-n))``; the two forms
are identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ExtrapolationError
from .heteroclinic import Orbit
from .model import ModelParams
from .pqr import equilibria, vector_field

PROFILE_NAMES = ("v_bar", "gamma_bar", "sigma_bar", "u_bar")


# -- pointwise transforms ----------------------------------------------------------


def tilde_from_pqr(p, q, r, n: float):
    """Invert the ``(p, q, r)`` definitions.

    Returns
    -------
    tuple of ndarray
        ``(v~, gamma~, sigma~, u~)``.

    Raises
    ------
    DomainError
        For ``p <= 0`` or ``r < 0``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(p <= 0):
        raise DomainError("inverse transform needs p > 0")
    if np.any(r < 0):
        raise DomainError("inverse transform needs r >= 0")
    e = 1.0 / (2.0 - n)
    vt = (p ** (-(1.0 - n)) * q ** (2.0 - n) * r**n) ** e / n
    gt = (p * r**n) ** e
    st = (p ** (-(1.0 - n)) * r**n) ** e
    ut = (p * r * r) ** e
    return vt, gt, st, ut


def pqr_from_tilde(vt, gt, st, ut=None, n: float | None = None):
    """Forward definitions ``p = g/s``, ``q = n v/s``, ``r = (s g**(1-n))**(1/n)``."""
    if n is None:
        raise TypeError("n is required")
    vt, gt, st = (np.asarray(a, dtype=float) for a in (vt, gt, st))
    return gt / st, n * vt / st, (st * gt ** (1.0 - n)) ** (1.0 / n)


def _powers(n):
    """Exponents ``a`` with ``bar = xi**a * tilde`` for (V, G, S, U)."""
    return -n / (2.0 - n), -2.0 / (2.0 - n), 1.0 - n / (2.0 - n), -2.0 / (2.0 - n)


def bars_from_pqr(xi, pts, n: float):
    """Profiles ``(V, G, S, U)`` at ``xi > 0`` from orbit points ``(m, 3)``."""
    xi = np.asarray(xi, dtype=float)
    pts = np.atleast_2d(pts)
    tildes = tilde_from_pqr(pts[:, 0], pts[:, 1], pts[:, 2], n)
    return tuple(xi**a * t for a, t in zip(_powers(n), tildes))


# -- Taylor data at the origin -----------------------------------------------------


def taylor_coefficients(params: ModelParams) -> tuple[float, float]:
    """Second derivatives ``(G_xixi(0), U_xixi(0))`` of the profiles.

    ``U_xixi(0) / G_xixi(0) = r0 + 2 lam``.

    Raises
    ------
    DomainError
        When ``1/2 - n lam / ((1-n) r0)`` vanishes (singular expansion).
    """
    n, lam = params.n, params.lam
    r0 = params.r0
    denom = 0.5 - (n / (1.0 - n)) * (lam / r0)
    if abs(denom) <= 1e-12:
        raise DomainError("Taylor expansion is singular at these parameters")
    g2 = (
        -(params.gamma_bar0**2 * params.u_bar0 ** (1.0 - n))
        * (lam / (2.0 - n))
        * (lam / (1.0 - n))
        / denom
        / lam
    )
    return g2, g2 * (r0 + 2.0 * lam)


def richardson_origin(xi, values) -> float:
    """Richardson extrapolation to ``xi = 0`` from the three smallest samples.

    Interpolates ``a + b xi^2 + c xi^4`` (profiles are even) and returns ``a``.
    """
    xi = np.asarray(xi, dtype=float)[:3]
    values = np.asarray(values, dtype=float)[:3]
    A = np.column_stack((np.ones(3), xi**2, xi**4))
    coef = np.linalg.solve(A, values)
    return float(coef[0])


# -- profiles --------------------------------------------------------------------


@dataclass
class Profile:
    """Self-similar profiles sampled on ``xi = e^eta`` with dense evaluation.

    ``evaluate`` uses the orbit's dense interpolant in ``eta = log xi``; below
    the first sample it switches to the even Taylor expansion anchored at the
    first sample, and it raises beyond the last sample.
    """

    params: ModelParams
    orbit: Orbit = field(repr=False)
    xi: np.ndarray
    v_bar: np.ndarray
    gamma_bar: np.ndarray
    sigma_bar: np.ndarray
    u_bar: np.ndarray
    taylor: tuple = (0.0, 0.0)
    origin: dict = field(default_factory=dict)
    tail_converged: bool = False

    @property
    def xi_min(self) -> float:
        return float(self.xi[0])

    @property
    def xi_max(self) -> float:
        return float(self.xi[-1])

    def as_array(self) -> np.ndarray:
        return np.column_stack((self.xi, self.v_bar, self.gamma_bar, self.sigma_bar, self.u_bar))

    def evaluate(self, xi):
        """Profiles ``(V, G, S, U)`` at ``xi >= 0``.

        Raises
        ------
        ExtrapolationError
            For ``xi`` beyond the sampled range.
        """
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi).ravel()
        if np.any(flat < 0):
            raise DomainError("profiles are evaluated at xi >= 0; use symmetry for x < 0")
        if np.any(flat > self.xi_max * (1.0 + 1e-12)):
            raise ExtrapolationError(
                f"xi={flat.max():.6g} beyond the orbit range xi_max={self.xi_max:.6g}; widen the orbit span"
            )
        out = np.empty((4, flat.size))
        big = flat >= self.xi_min
        if big.any():
            x = np.minimum(flat[big], self.xi_max)
            pts = self.orbit(np.log(x))
            out[:, big] = np.array(bars_from_pqr(x, pts, self.params.n))
        if (~big).any():
            out[:, ~big] = self._near_origin(flat[~big])
        shaped = [o.reshape(xi.shape) for o in out]
        if xi.ndim == 0:
            shaped = [float(o) for o in shaped]
        return tuple(shaped)

    def _near_origin(self, x):
        n = self.params.n
        g2, u2 = self.taylor
        x0 = self.xi_min
        v0, g0, _, u0 = self.v_bar[0], self.gamma_bar[0], self.sigma_bar[0], self.u_bar[0]
        g = g0 + 0.5 * g2 * (x * x - x0 * x0)
        u = u0 + 0.5 * u2 * (x * x - x0 * x0)
        slope = v0 / x0 - u2 * x0 * x0 / 6.0
        v = x * (slope + u2 * x * x / 6.0)
        return np.array([v, g, u**n / g, u])

    def __call__(self, xi):
        return self.evaluate(xi)


def profile_from_orbit(orbit: Orbit, params: ModelParams) -> Profile:
    """Profiles on the orbit samples ``xi = e^eta`` of a translated orbit."""
    if orbit.eta0 is None:
        raise ValueError("profile reconstruction needs a translated orbit (apply_translation)")
    xi = np.exp(orbit.eta)
    v, g, s, u = bars_from_pqr(xi, orbit.points, params.n)
    prof = Profile(params, orbit, xi, v, g, s, u, taylor=taylor_coefficients(params))
    prof.origin = {
        "gamma_bar": richardson_origin(xi, g),
        "u_bar": richardson_origin(xi, u),
        "sigma_bar": richardson_origin(xi, s),
        "v_bar": 0.0,
    }
    prof.tail_converged = _tail_converged(xi, v)
    return prof


def _tail_converged(xi, v, rtol=1e-3):
    """Whether V has settled to a constant over the last decade of xi."""
    sel = xi >= xi[-1] / 10.0
    if sel.sum() < 3:
        return False
    tail = v[sel]
    return bool(np.ptp(tail) <= rtol * abs(tail[-1]))


def tail_slopes(profile: Profile, decades: float = 1.0) -> dict:
    """Log-log slopes of ``G``, ``U``, ``S`` over the last ``decades`` of xi."""
    hi = profile.xi_max
    x = np.geomspace(hi / 10.0**decades, hi, 200)
    v, g, s, u = profile.evaluate(x)
    lx = np.log(x)
    return {
        name: float(np.polyfit(lx, np.log(vals), 1)[0])
        for name, vals in (("gamma_bar", g), ("u_bar", u), ("sigma_bar", s))
    }


def origin_width(profile: Profile) -> float:
    """Length scale ``sqrt(|G(0) / G''(0)|)`` of the core from the Taylor data."""
    g2 = profile.taylor[0]
    return float(np.sqrt(abs(profile.params.gamma_bar0 / g2))) if g2 else 1.0


def _correction_powers(profile: Profile, cap: float = 6.5, merge: float = 0.3) -> list[float]:
    """Powers of ``h`` in the error of the origin second difference.

    ``G`` is even and smooth in ``xi`` apart from a ``xi^mu`` term fed by the
    third eigenvalue at M0, so the error carries ``h^2, h^4, ...`` and
    ``h^{mu-2}, h^mu, ...``. Powers closer than ``merge`` are fitted as one.
    """
    mu = equilibria(profile.params.n, profile.params.lam)[0].eigenvalues[2]
    cand = sorted(k for k in (2.0, 4.0, 6.0, mu - 2.0, mu, 2.0 * mu - 2.0, mu + 2.0) if 0.0 < k < cap)
    out: list[float] = []
    for k in cand:
        if not out or k - out[-1] > merge:
            out.append(float(k))
    return out


def origin_second_differences(profile: Profile, h: float | None = None, extrapolate: bool = True
                              ) -> tuple[float, float]:
    """Second differences of ``G`` and ``U`` at the origin from orbit samples.

    Uses the even stencil ``2 (f(h) - f(0)) / h^2`` with ``f(0)`` from
    Richardson extrapolation. The default ``h`` is a tenth of the core width,
    well above the first sample so the orbit data (not the Taylor branch) is
    probed. With ``extrapolate`` the stencil is evaluated at ``h, h/2, ...``
    and the known error powers are eliminated.
    """
    if h is None:
        h = 0.1 * origin_width(profile)
    powers = _correction_powers(profile) if extrapolate else []
    steps = h * 0.5 ** np.arange(len(powers) + 1)
    if steps[-1] < 4.0 * profile.xi_min:
        raise DomainError("second-difference step falls below the sampled range")
    _, g, _, u = profile.evaluate(steps)
    dg = 2.0 * (g - profile.origin["gamma_bar"]) / steps**2
    du = 2.0 * (u - profile.origin["u_bar"]) / steps**2
    if not powers:
        return float(dg[0]), float(du[0])
    A = np.column_stack([np.ones_like(steps)] + [steps**k for k in powers])
    return float(np.linalg.solve(A, dg)[0]), float(np.linalg.solve(A, du)[0])


def profile_ode_residual(profile: Profile, interior: slice = slice(1, -1)) -> dict:
    """Relative residuals of the singular profile ODEs on the orbit samples.

    ``lam (n/(2-n) V + xi U) = S_xi`` and ``lam (2/(2-n) G + xi G_xi) = U - G``,
    with ``xi``-derivatives of ``S`` and ``G`` taken along the orbit through
    the ``(p, q, r)`` vector field.
    """
    n, lam = profile.params.n, profile.params.lam
    pts = profile.orbit.points[interior]
    xi = profile.xi[interior]
    p, q, r = pts.T
    dp, dq, dr = vector_field(pts.T, n, lam)
    lp, lr = dp / p, dr / r
    e = 1.0 / (2.0 - n)
    dlog_g = e * (lp + n * lr)  # d/deta log gamma~
    dlog_s = e * (-(1.0 - n) * lp + n * lr)
    V, G, S, U = (a[interior] for a in (profile.v_bar, profile.gamma_bar, profile.sigma_bar, profile.u_bar))
    a_g, a_s = -2.0 / (2.0 - n), 1.0 - n / (2.0 - n)
    xi_g_xi = G * (a_g + dlog_g)
    s_xi = S * (a_s + dlog_s) / xi
    lhs_v = lam * (n / (2.0 - n) * V + xi * U)
    lhs_g = lam * (2.0 / (2.0 - n) * G + xi_g_xi)
    res_v = np.abs(lhs_v - s_xi) / np.maximum(np.abs(lhs_v), np.abs(s_xi))
    res_g = np.abs(lhs_g - (U - G)) / np.maximum(np.abs(lhs_g), np.abs(U - G))
    res_c = np.abs(S - U**n / G) / S
    return {"momentum": float(res_v.max()), "kinematic": float(res_g.max()), "constitutive": float(res_c.max())}


def rescale_profile(profile: Profile, A: float):
    """Evaluator of the scaled profiles ``(V_A, G_A, S_A, U_A)(xi)``."""
    n = profile.params.n
    k = (n / (2.0 - n), 2.0 / (2.0 - n), -1.0 + n / (2.0 - n), 2.0 / (2.0 - n))

    def fn(xi):
        vals = profile.evaluate(A * np.asarray(xi, dtype=float))
        return tuple(A**kk * vv for kk, vv in zip(k, vals))

    return fn


# -- physical fields ---------------------------------------------------------------


@dataclass(frozen=True)
class FieldFrame:
    t: float
    x: np.ndarray
    v: np.ndarray
    gamma: np.ndarray
    sigma: np.ndarray
    u: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.column_stack((self.x, self.v, self.gamma, self.sigma, self.u))


def time_exponents(params: ModelParams) -> dict:
    """Powers of ``s = 1 + t/gamma0`` multiplying each profile."""
    n, lam = params.n, params.lam
    return {
        "v": lam * n / (2.0 - n),
        "gamma": 1.0 + 2.0 * lam / (2.0 - n),
        "sigma": -1.0 - 2.0 * lam * (1.0 - n) / (2.0 - n),
        "u": 2.0 * lam / (2.0 - n),
        "xi": lam,
    }


def fields_at(profile: Profile, x, t) -> FieldFrame:
    """Physical fields at positions ``x`` (any sign) and time ``t >= 0``.

    Raises
    ------
    ExtrapolationError
        When ``|x| s**lam`` leaves the sampled profile range.
    """
    p = profile.params
    if t < 0:
        raise DomainError("time must be non-negative")
    x = np.asarray(x, dtype=float)
    s = 1.0 + t / p.gamma0
    ex = time_exponents(p)
    xi = np.abs(x) * s ** ex["xi"]
    V, G, S, U = profile.evaluate(xi)
    return FieldFrame(
        t=float(t),
        x=x,
        v=s ** ex["v"] * np.sign(x) * V,
        gamma=p.gamma0 * s ** ex["gamma"] * G,
        sigma=s ** ex["sigma"] * S / p.gamma0,
        u=s ** ex["u"] * U,
    )


def fields_at_time(profile: Profile, t: float, x=None, num: int = 401, half_width: float | None = None) -> FieldFrame:
    """Frame on a symmetric grid (default ``[-w, w]`` with ``w`` set so ``xi <= xi_max``)."""
    if x is None:
        s = 1.0 + t / profile.params.gamma0
        w = half_width if half_width is not None else min(1.0, profile.xi_max / s**profile.params.lam)
        x = np.linspace(-w, w, num)
    return fields_at(profile, x, t)


def frames(profile: Profile, times, x=None, num: int = 401, half_width: float | None = None) -> list[FieldFrame]:
    return [fields_at_time(profile, float(t), x=x, num=num, half_width=half_width) for t in times]


def fit_growth_exponent(times, values, gamma0: float = 1.0) -> float:
    """Slope of ``log values`` against ``log(1 + t/gamma0)``."""
    s = 1.0 + np.asarray(times, dtype=float) / gamma0
    return float(np.polyfit(np.log(s), np.log(np.asarray(values, dtype=float)), 1)[0])


def focusing_exponent(params: ModelParams) -> float:
    """Growth exponent of ``gamma`` at fixed ``x != 0`` for large ``t``."""
    n, lam = params.n, params.lam
    return 1.0 - n * lam / ((2.0 - n) * (1.0 - n))


def boundary_report(profile: Profile) -> dict:
    """Richardson values at the origin against the prescribed data."""
    p = profile.params
    want = {"gamma_bar": p.gamma_bar0, "u_bar": p.u_bar0, "sigma_bar": p.sigma_bar0}
    return {
        k: {"value": profile.origin[k], "expected": v, "rel_err": abs(profile.origin[k] - v) / v}
        for k, v in want.items()
    } | {"v_bar_tail": float(profile.v_bar[-1]), "v_bar_tail_converged": profile.tail_converged}


__all__ = [
    "FieldFrame",
    "PROFILE_NAMES",
    "Profile",
    "bars_from_pqr",
    "boundary_report",
    "fields_at",
    "fields_at_time",
    "fit_growth_exponent",
    "focusing_exponent",
    "frames",
    "origin_second_differences",
    "origin_width",
    "pqr_from_tilde",
    "profile_from_orbit",
    "profile_ode_residual",
    "rescale_profile",
    "richardson_origin",
    "tail_slopes",
    "taylor_coefficients",
    "tilde_from_pqr",
]
