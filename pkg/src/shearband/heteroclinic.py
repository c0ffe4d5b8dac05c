"""Heteroclinic orbit from M0 to M1 emanating along the X02 direction.

Two independent constructions are provided.

``backward`` (``shoot_family`` + ``select_x02_orbit``)
    Seeds on the stable eigenspace of M1 are integrated backward in eta, in
    coordinates centred at M1. Seeds reaching a small ball around M0 form the
    heteroclinic surface; the seed angle is bisected on the sign of the X01
    coordinate at arrival, which isolates the orbit leaving M0 along X02.

``forward`` (``track_forward``)
    Starts at ``M0 + eps X02`` and follows the separatrix between orbits
    escaping to large ``r`` and orbits collapsing towards ``r = 0`` by
    repeated bisection on an ``r`` offset. Each bisection replays one step
    grid so the discrete flow is smooth in the offset.

The backward route needs the X01 sliver of seed angles to be wider than the
floating-point resolution. Its width scales like ``delta**((1-2n)/n)``, which
is far below resolution for small ``n``; ``construct_orbit`` then uses the
forward route.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    BudgetExceeded,
    FitIllConditioned,
    NoConnection,
    NonFinite,
    SelectionFailed,
    StepUnderflow,
)
from .integrate import Event, IntegratorConfig, integrate
from .model import ModelParams
from .pqr import dual_basis, equilibria, equilibrium_point, make_field, make_field_m1

log = logging.getLogger(__name__)

ORBIT_CONFIG = IntegratorConfig(
    rel_tol=1e-12, abs_tol=1e-20, h_init=1e-3, h_min=1e-12, h_max=0.5, max_steps=400_000
)
FIT_WINDOW = (1e-6, 1e-3)
MIN_FIT_POINTS = 20
MIN_KAPPA_SAMPLES = 10
SLOPE_TOL = 0.005
_ESCAPE_RADIUS = 20.0
_SHOOT_SPAN = 300.0


@dataclass
class Orbit:
    """Sampled trajectory ``eta -> (p, q, r)`` with dense evaluation.

    ``eta`` is in the current (possibly translated) frame. ``pieces`` hold
    dense interpolants in the raw frame ``eta - shift``.
    """

    n: float
    lam: float
    eta: np.ndarray
    points: np.ndarray
    pieces: list = field(default_factory=list, repr=False)
    shift: float = 0.0
    kappa2: float | None = None
    eta0: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def eta_min(self) -> float:
        return float(self.eta[0])

    @property
    def eta_max(self) -> float:
        return float(self.eta[-1])

    @property
    def p(self):
        return self.points[:, 0]

    @property
    def q(self):
        return self.points[:, 1]

    @property
    def r(self):
        return self.points[:, 2]

    def __call__(self, eta) -> np.ndarray:
        e = np.atleast_1d(np.asarray(eta, dtype=float))
        tol = 1e-9 * max(1.0, abs(self.eta_max), abs(self.eta_min))
        if np.any(e < self.eta_min - tol) or np.any(e > self.eta_max + tol):
            raise ValueError("orbit evaluated outside its sampled range")
        e = np.clip(e, self.eta_min, self.eta_max)
        if not self.pieces:
            out = CubicSpline(self.eta, self.points, axis=0)(e)
        else:
            raw = e - self.shift
            out = np.empty((e.size, 3))
            starts = np.array([pc[0] for pc in self.pieces])
            idx = np.clip(np.searchsorted(starts, raw, side="right") - 1, 0, len(self.pieces) - 1)
            for k in np.unique(idx):
                lo, hi, fn = self.pieces[k]
                sel = idx == k
                out[sel] = fn(np.clip(raw[sel], lo, hi))
        return out[0] if np.ndim(eta) == 0 else out

    def translated(self, delta: float) -> "Orbit":
        """Orbit ``psi(eta) = phi(eta - delta)``."""
        return replace(self, eta=self.eta + delta, shift=self.shift + delta, diagnostics=dict(self.diagnostics))

    def resample(self, num: int = 2000) -> tuple[np.ndarray, np.ndarray]:
        e = np.linspace(self.eta_min, self.eta_max, num)
        return e, self(e)


# -- fitting helpers -------------------------------------------------------------


def fit_exponent(eta, values, min_points: int = MIN_FIT_POINTS) -> float:
    """Least-squares slope of ``log(values)`` against ``eta``."""
    eta = np.asarray(eta, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = values > 0
    if ok.sum() < min_points:
        raise FitIllConditioned(f"{int(ok.sum())} usable points, need {min_points}")
    slope, _ = np.polyfit(eta[ok], np.log(values[ok]), 1)
    return float(slope)


def _window_interval(orbit: Orbit, center: np.ndarray, window, end: str):
    """Eta interval of the block of samples next to ``end`` inside the distance window."""
    d = np.linalg.norm(orbit.points - center, axis=1)
    inside = (d >= window[0]) & (d <= window[1])
    idx = np.flatnonzero(inside)
    if idx.size == 0:
        return None, 0
    # contiguous block nearest to the requested end
    breaks = np.flatnonzero(np.diff(idx) > 1)
    blocks = np.split(idx, breaks + 1)
    block = blocks[0] if end == "start" else blocks[-1]
    lo, hi = block[0], block[-1]
    # extend to neighbouring samples so the dense resampling covers the window
    lo_e = orbit.eta[max(lo - 1, 0)]
    hi_e = orbit.eta[min(hi + 1, orbit.eta.size - 1)]
    return (lo_e, hi_e), block.size


def _window_samples(orbit: Orbit, center, window, end, num=200):
    interval, count = _window_interval(orbit, center, window, end)
    if interval is None:
        raise FitIllConditioned("no samples inside the fitting window")
    e = np.linspace(interval[0], interval[1], num)
    x = orbit(e)
    d = np.linalg.norm(x - center, axis=1)
    keep = (d >= window[0]) & (d <= window[1])
    return e[keep], x[keep], count


def near_m0_exponent(orbit: Orbit, window=FIT_WINDOW) -> float:
    m0 = equilibrium_point("M0", orbit.n, orbit.lam)
    e, x, _ = _window_samples(orbit, m0, window, "start")
    return fit_exponent(e, np.linalg.norm(x - m0, axis=1))


def near_m1_exponents(orbit: Orbit, window=FIT_WINDOW) -> tuple[float, float]:
    """Exponents of ``p`` and of ``|phi - M1|`` as ``eta`` grows.

    ``p`` has no X11 component, so its rate is ``-n/(1-n)`` for every ``n``;
    the distance follows the slower of ``-1`` and ``-n/(1-n)``.
    """
    m1 = equilibrium_point("M1", orbit.n, orbit.lam)
    e, x, _ = _window_samples(orbit, m1, window, "end")
    return fit_exponent(e, x[:, 0]), fit_exponent(e, np.linalg.norm(x - m1, axis=1))


def fit_kappa2(orbit: Orbit, window=FIT_WINDOW) -> float:
    """Coefficient of ``e^{2 eta} X02`` near M0 (unnormalised X02).

    The X02 coordinate in the M0 eigenbasis equals ``r0 * p`` exactly,
    because X01 and X03 have zero p-component. ``log(r0 p) - 2 eta`` is fitted
    by least squares to ``log kappa2 + a e^{2 eta}`` (plus ``b e^{mu03 eta}``
    when that rate is below 4), absorbing the leading nonlinear corrections
    that would otherwise bias the estimate by about the window radius.

    Raises
    ------
    FitIllConditioned
        Fewer than 10 orbit samples inside the window.
    """
    n, lam = orbit.n, orbit.lam
    m0 = equilibrium_point("M0", n, lam)
    r0 = m0[2]
    interval, count = _window_interval(orbit, m0, window, "start")
    if count < MIN_KAPPA_SAMPLES:
        raise FitIllConditioned(f"{count} samples in the near-M0 window, need {MIN_KAPPA_SAMPLES}")
    if orbit.pieces:
        e, x, _ = _window_samples(orbit, m0, window, "start")
    else:
        d = np.linalg.norm(orbit.points - m0, axis=1)
        keep = (d >= window[0]) & (d <= window[1])
        e, x = orbit.eta[keep], orbit.points[keep]
    vals = r0 * x[:, 0]
    if np.any(vals <= 0):
        raise FitIllConditioned("non-positive X02 coordinate inside the window")
    y = np.log(vals) - 2.0 * e
    # centre eta so the exponential columns stay O(1)
    ec = e - e.max()
    cols = [np.ones_like(e), np.exp(2.0 * ec)]
    mu3 = equilibria(n, lam)[0].eigenvalues[2]
    if 2.2 < mu3 < 4.0:
        cols.append(np.exp(mu3 * ec))
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), y, rcond=None)
    return float(np.exp(coef[0]))


def translation_for(kappa2: float, kappa: float) -> float:
    return 0.5 * math.log(kappa2 / kappa)


def apply_translation(orbit: Orbit, params: ModelParams) -> Orbit:
    """Shift ``eta`` so that ``e^{-2 eta}(phi - M0) -> kappa X02`` with ``kappa = params.kappa``."""
    k2 = fit_kappa2(orbit)
    eta0 = translation_for(k2, params.kappa)
    out = orbit.translated(eta0)
    out.kappa2 = k2 * math.exp(-2.0 * eta0)
    out.eta0 = eta0
    out.diagnostics["kappa2_raw"] = k2
    out.diagnostics["eta0"] = eta0
    return out


def orbit_diagnostics(orbit: Orbit) -> dict:
    m0 = equilibrium_point("M0", orbit.n, orbit.lam)
    m1 = equilibrium_point("M1", orbit.n, orbit.lam)
    d = {
        "endpoint_residual_m0": float(np.linalg.norm(orbit.points[0] - m0)),
        "endpoint_residual_m1": float(np.linalg.norm(orbit.points[-1] - m1)),
        "p_min_interior": float(orbit.points[1:-1, 0].min()),
        "r_min": float(orbit.points[:, 2].min()),
        "q_end": float(orbit.points[-1, 1]),
        "r_end": float(orbit.points[-1, 2]),
        "r_start": float(orbit.points[0, 2]),
    }
    try:
        d["exponent_m0"] = near_m0_exponent(orbit)
    except FitIllConditioned:
        d["exponent_m0"] = float("nan")
    try:
        d["exponent_m1"], d["exponent_m1_distance"] = near_m1_exponents(orbit)
    except FitIllConditioned:
        d["exponent_m1"] = d["exponent_m1_distance"] = float("nan")
    return d


# -- backward shooting from M1 -----------------------------------------------------


@dataclass
class Shot:
    theta: float
    reached: bool
    escaped: bool
    c1: float
    traj: object = field(repr=False, default=None)


def seed_offset(theta: float, n: float, lam: float, delta: float) -> np.ndarray:
    """``delta`` times the unit vector along ``cos(theta) X11 + sin(theta) X12``."""
    m1 = equilibria(n, lam)[1]
    v = math.cos(theta) * m1.vectors[0] + math.sin(theta) * m1.vectors[1]
    return delta * v / np.linalg.norm(v)


class _Shooter:
    def __init__(self, n, lam, delta_seed, cfg, arrival):
        self.n, self.lam = n, lam
        self.delta = delta_seed
        self.cfg = (cfg or ORBIT_CONFIG).replace(direction="backward")
        self.f = make_field_m1(n, lam)
        self.m1 = equilibrium_point("M1", n, lam)
        m0 = equilibria(n, lam)[0]
        self.offset = m0.point - self.m1
        self.dual0 = dual_basis(m0.raw_vectors)
        self.arrival = arrival
        o0, o1, o2 = (float(c) for c in self.offset)
        self.events = [
            Event(lambda t, y: math.hypot(y[0] - o0, y[1] - o1, y[2] - o2) - arrival, name="arrive"),
            Event(lambda t, y: math.hypot(y[0], y[1], y[2]) - _ESCAPE_RADIUS, name="escape"),
        ]
        self.count = 0

    def __call__(self, theta: float) -> Shot:
        self.count += 1
        y0 = seed_offset(theta, self.n, self.lam, self.delta)
        try:
            traj = integrate(self.f, y0, (0.0, -_SHOOT_SPAN), self.cfg, events=self.events)
        except (BudgetExceeded, StepUnderflow, NonFinite):
            return Shot(theta, False, True, float("nan"))
        name = traj.events[-1].name if traj.status == "event" else ""
        if name == "arrive":
            c1 = float(self.dual0[0] @ (traj.x_final - self.offset))
            return Shot(theta, True, False, c1, traj)
        return Shot(theta, False, name == "escape", float("nan"), traj)

    def orbit(self, shot: Shot) -> Orbit:
        traj = shot.traj
        order = np.argsort(traj.t)
        eta = traj.t[order]
        pts = traj.x[order] + self.m1
        m1 = self.m1
        piece = (float(eta[0]), float(eta[-1]), lambda e, tr=traj: tr(e) + m1)
        return Orbit(self.n, self.lam, eta, pts, pieces=[piece])


def default_theta_grid(num: int = 24) -> np.ndarray:
    return np.linspace(0.0, math.pi, num + 2)[1:-1]


def shoot_family(
    n: float,
    lam: float,
    grid=None,
    delta_seed: float = 1e-6,
    cfg: IntegratorConfig | None = None,
) -> list[Orbit]:
    """Backward-integrate seeds around M1 and keep those reaching M0.

    Returns
    -------
    list of Orbit
        One per reaching seed; ``diagnostics`` carry ``theta``, ``c1`` (X01
        coordinate at arrival), ``exponent_m0`` and the survey (``grid``,
        ``reached``).

    Raises
    ------
    NoConnection
    """
    if not 1e-8 <= delta_seed <= 1e-4:
        raise ValueError("delta_seed must lie in [1e-8, 1e-4]")
    grid = default_theta_grid() if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.sin(grid) <= 0):
        raise ValueError("seed angles must lie on the positive-p side (sin(theta) > 0)")
    shooter = _Shooter(n, lam, delta_seed, cfg, 0.1 * delta_seed)
    shots = [shooter(th) for th in grid]
    reached = np.array([s.reached for s in shots])
    if not reached.any():
        raise NoConnection(f"no seed reached the M0 ball for n={n}, lambda={lam}")
    out = []
    for s in shots:
        if not s.reached:
            continue
        orb = shooter.orbit(s)
        diag = {"theta": s.theta, "c1": s.c1, "grid": grid, "reached": reached, "method": "backward"}
        try:
            diag["exponent_m0"] = near_m0_exponent(orb)
        except FitIllConditioned:
            diag["exponent_m0"] = float("nan")
        orb.diagnostics = diag
        out.append(orb)
    return out


def select_x02_orbit(
    candidates: list[Orbit],
    n: float,
    lam: float,
    delta_seed: float = 1e-6,
    cfg: IntegratorConfig | None = None,
    budget: int = 60,
) -> Orbit:
    """Isolate the candidate with vanishing X01 component near M0.

    Reaching seeds with opposite signs of the X01 coordinate bracket the
    selected orbit. When the survey holds no such pair, the boundary between
    reaching and non-reaching seeds is bisected, where the sign change lives.
    The bracket is then bisected to floating-point resolution and the result
    is accepted only if its near-M0 exponent is within 0.5% of 2.

    Raises
    ------
    SelectionFailed
    """
    if not candidates:
        raise SelectionFailed("empty candidate set")
    shooter = _Shooter(n, lam, delta_seed, cfg, 0.1 * delta_seed)
    grid = candidates[0].diagnostics["grid"]
    reached = candidates[0].diagnostics["reached"]
    by_theta = {c.diagnostics["theta"]: c.diagnostics["c1"] for c in candidates}

    bracket = None
    ths = sorted(by_theta)
    for a, b in zip(ths, ths[1:]):
        ia, ib = np.searchsorted(grid, a), np.searchsorted(grid, b)
        if ib == ia + 1 and np.sign(by_theta[a]) != np.sign(by_theta[b]):
            bracket = (a, by_theta[a], b, by_theta[b])
            break

    if bracket is None:
        for i in range(len(grid) - 1):
            if reached[i] == reached[i + 1]:
                continue
            inside, outside = (grid[i], grid[i + 1]) if reached[i] else (grid[i + 1], grid[i])
            bracket = _bisect_boundary(shooter, inside, by_theta[inside], outside, budget)
            if bracket is not None:
                break
    if bracket is None:
        raise SelectionFailed(
            "no sign change of the X01 coordinate among reaching seeds "
            f"(n={n}, lambda={lam}, {shooter.count} extra shots)"
        )

    a, ca, b, cb = bracket
    best = None
    for _ in range(budget):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        shot = shooter(m)
        if not shot.reached:
            raise SelectionFailed(f"seed theta={m!r} inside the X01 bracket left the M0 basin")
        if np.sign(shot.c1) == np.sign(ca):
            a, ca = m, shot.c1
        else:
            b, cb = m, shot.c1
        if best is None or abs(shot.c1) < abs(best.c1):
            best = shot
    if best is None:
        best = shooter(a if abs(ca) <= abs(cb) else b)
    orbit = shooter.orbit(best)
    slope = near_m0_exponent(orbit)
    if abs(slope - 2.0) > SLOPE_TOL * 2.0:
        raise SelectionFailed(f"selected orbit has near-M0 exponent {slope:.5f}, expected 2")
    orbit.diagnostics = {"method": "backward", "theta": best.theta, "c1": best.c1, "shots": shooter.count}
    return orbit


def _bisect_boundary(shooter, inside, c_in, outside, budget):
    """Bisect between a reaching and a non-reaching seed, watching the X01 sign."""
    last = {np.sign(c_in): (inside, c_in)}
    for _ in range(budget):
        m = 0.5 * (inside + outside)
        if m in (inside, outside):
            return None
        shot = shooter(m)
        if shot.reached:
            inside = m
            last[np.sign(shot.c1)] = (m, shot.c1)
            if len(last) == 2:
                (ta, ca), (tb, cb) = last[-1.0], last[1.0]
                return (ta, ca, tb, cb) if ta < tb else (tb, cb, ta, ca)
        else:
            outside = m
    return None


# -- forward tracking from M0 ------------------------------------------------------


def track_forward(
    n: float,
    lam: float,
    seed_eps: float = 1e-7,
    target: float = 5e-7,
    div_tol: float = 1e-9,
    cfg: IntegratorConfig | None = None,
    max_restarts: int = 2000,
    span: float = 400.0,
) -> Orbit:
    """Follow the X02 orbit out of M0 by bisection on an ``r`` offset.

    At each restart the current state is bracketed by two ``r``-perturbed
    copies, one escaping upward (``r`` large) and one collapsing towards
    ``r = 0``; the bracket is bisected to adjacent floats, the pair is
    integrated in lock-step until it separates by ``div_tol`` (relative in
    ``r``) and their mean becomes the next restart state. The kept orbit is
    the pair mean, which is continuous across restarts.

    Raises
    ------
    NoConnection
        If the separatrix cannot be bracketed or the tracker stalls.
    """
    cfg = (cfg or ORBIT_CONFIG).replace(direction="forward")
    f = make_field(n, lam)
    eqs = equilibria(n, lam)
    m0, m1 = eqs[0].point, eqs[1].point
    r0, r1 = m0[2], m1[2]
    r_dn = 0.75 * r1
    up_margin = 0.25 * (r0 - r1)

    def f2(t, z):
        return f(t, z[:3]) + f(t, z[3:])

    x = m0 + seed_eps * eqs[0].vectors[1]
    eta = 0.0
    pieces, etas, pts = [], [], []
    stalls = 0
    for k in range(max_restarts):
        r_up = x[2] + up_margin
        events = [
            Event(lambda t, y: y[2] - r_up, name="up"),
            Event(lambda t, y: y[2] - r_dn, name="down"),
        ]

        def run(xs, steps=None):
            try:
                tr = integrate(f, xs, (eta, eta + span), cfg, events=events, steps=steps)
            except NonFinite:
                return 1, None
            except (StepUnderflow, BudgetExceeded):
                return 0, None
            if tr.status != "event":
                return 0, tr
            return (1 if tr.events[-1].name == "up" else -1), tr

        _, ref = run(x)
        if ref is None:
            raise NoConnection(f"tracker reference run failed at eta={eta:.4g}")
        grid = ref.t
        classify = lambda rr: run(np.array([x[0], x[1], rr]), grid)[0]

        # the separatrix lies within about div_tol of the restart state
        width = 4.0 * div_tol * abs(x[2])
        while True:
            lo, hi = x[2] - width, x[2] + width
            c_lo, c_hi = classify(lo), classify(hi)
            if c_lo == -1 and c_hi == 1:
                break
            width *= 10.0
            if width > 1e-2 * abs(x[2]):
                raise NoConnection(
                    f"separatrix lost at eta={eta:.4g} (classes {c_lo}, {c_hi})"
                )
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            c = classify(mid)
            if c == 1:
                hi = mid
            elif c == -1:
                lo = mid
            else:
                break

        z0 = np.concatenate((x, x))
        z0[2], z0[5] = lo, hi
        done = float(np.linalg.norm(x - m1)) < target
        pair_events = [
            Event(lambda t, z: abs(z[2] - z[5]) - div_tol * abs(z[2]), name="diverge"),
            Event(
                lambda t, z: math.hypot(
                    0.5 * (z[0] + z[3]) - m1[0], 0.5 * (z[1] + z[4]) - m1[1], 0.5 * (z[2] + z[5]) - m1[2]
                )
                - target,
                name="arrive",
                direction=-1,
            ),
        ]
        pair = integrate(f2, z0, (eta, eta + span), cfg, events=pair_events, steps=grid)
        if pair.status != "event":
            raise NoConnection(f"tracked pair never separated after eta={eta:.4g}")
        mean = 0.5 * (pair.x[:, :3] + pair.x[:, 3:])
        pieces.append((float(pair.t[0]), float(pair.t[-1]), _pair_mean(pair)))
        start = 0 if not etas else 1
        etas.append(pair.t[start:])
        pts.append(mean[start:])
        advance = pair.t[-1] - eta
        eta, x = float(pair.t[-1]), mean[-1].copy()
        log.debug("restart %d: eta=%.4f adv=%.3f |x-M1|=%.3e gap=%.2e", k, eta, advance,
                  np.linalg.norm(x - m1), (hi - lo) / abs(x[2]))
        if pair.events[-1].name == "arrive" or done:
            break
        stalls = stalls + 1 if advance < 1e-6 else 0
        if stalls > 5:
            raise NoConnection(f"forward tracker stalled at eta={eta:.4g}")
    else:
        raise NoConnection("forward tracker exhausted its restart budget")

    orbit = Orbit(n, lam, np.concatenate(etas), np.concatenate(pts), pieces=pieces)
    orbit.diagnostics = {"method": "forward", "restarts": k + 1, "seed_eps": seed_eps}
    return orbit


def _pair_mean(traj):
    def fn(e):
        z = np.atleast_2d(traj(e))
        return 0.5 * (z[:, :3] + z[:, 3:])

    return fn


# -- driver ----------------------------------------------------------------------


def backward_feasible(n: float, delta_seed: float = 1e-6, digits: float = 12.0) -> bool:
    """Whether the X01 sliver of seed angles, about ``delta**((1-2n)/n)``, is resolvable."""
    if n >= 0.5:
        return True
    return (1.0 - 2.0 * n) / n * math.log10(1.0 / delta_seed) <= digits


def construct_orbit(
    n: float,
    lam: float,
    method: str = "auto",
    delta_seed: float = 1e-6,
    cfg: IntegratorConfig | None = None,
    cache: bool = True,
) -> Orbit:
    """Raw (untranslated) heteroclinic orbit with diagnostics.

    ``method`` is ``"backward"``, ``"forward"`` or ``"auto"`` (backward when
    its selection window is resolvable, forward otherwise or on failure).
    The construction is deterministic, so results are memoised per argument
    set within the process; each call returns an independent copy.
    """
    if method not in ("auto", "backward", "forward"):
        raise ValueError(f"unknown method {method!r}")
    cfg = cfg or ORBIT_CONFIG
    key = (float(n), float(lam), method, float(delta_seed), cfg)
    orbit = _ORBIT_CACHE.get(key) if cache else None
    if orbit is None:
        orbit = _construct(n, lam, method, delta_seed, cfg)
        if cache:
            if len(_ORBIT_CACHE) >= _CACHE_SIZE:
                _ORBIT_CACHE.pop(next(iter(_ORBIT_CACHE)))
            _ORBIT_CACHE[key] = orbit
    return replace(orbit, diagnostics=dict(orbit.diagnostics))


_ORBIT_CACHE: dict = {}
_CACHE_SIZE = 8


def clear_orbit_cache() -> None:
    _ORBIT_CACHE.clear()


def _construct(n, lam, method, delta_seed, cfg):
    orbit = None
    if method == "backward" or (method == "auto" and backward_feasible(n, delta_seed)):
        try:
            cands = shoot_family(n, lam, delta_seed=delta_seed, cfg=cfg)
            orbit = select_x02_orbit(cands, n, lam, delta_seed=delta_seed, cfg=cfg)
        except (SelectionFailed, NoConnection) as exc:
            if method == "backward":
                raise
            log.info("backward selection failed (%s); using forward tracking", exc)
    if orbit is None:
        orbit = track_forward(n, lam, target=0.5 * delta_seed, cfg=cfg)
    orbit.kappa2 = fit_kappa2(orbit)
    orbit.diagnostics.update(orbit_diagnostics(orbit))
    return orbit


def build_translated_orbit(params: ModelParams, method: str = "auto", delta_seed: float = 1e-6,
                           cfg: IntegratorConfig | None = None, cache: bool = True) -> Orbit:
    """Constructed orbit translated to match ``params`` (Gamma_bar0, U_bar0)."""
    raw = construct_orbit(params.n, params.lam, method=method, delta_seed=delta_seed, cfg=cfg, cache=cache)
    out = apply_translation(raw, params)
    out.diagnostics.update(orbit_diagnostics(out))
    return out
