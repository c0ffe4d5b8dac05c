"""Adaptive Dormand-Prince 5(4) integration with dense output and events.

The stepper advances the 5th-order solution, controls the step with the
embedded 4th-order estimate and keeps the standard quartic continuous
extension for every accepted step. Backward integration negates the field and
the span so that a single forward code path is used.

A previously computed step sequence can be replayed (``steps=``). Replaying
makes the discrete flow map a smooth function of the initial state, which is
what bisection-based shooting needs: two nearby initial states integrated on
the same grid differ only by the true sensitivity of the flow, not by
step-selection noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    EventNotFound,
    NonFinite,
    StepUnderflow,
    ValidationError,
)

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# difference between the 5th- and 4th-order weights (FSAL stage included)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense-output weights for the quartic continuous extension
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 10.0
_EVENT_TOL = 1e-10
_EVENT_MAX_ITER = 200


@dataclass(frozen=True)
class IntegratorConfig:
    """Step-control settings.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Componentwise local error bound ``rel_tol*|x| + abs_tol``.
    h_init, h_min, h_max : float
        Initial, minimal and maximal step magnitudes.
    max_steps : int
        Budget of attempted steps.
    direction : {"forward", "backward"}
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 10.0
    max_steps: int = 200_000
    direction: str = "forward"

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-2 and 0 < self.abs_tol <= 1e-2):
            raise ValidationError("tolerances must lie in (0, 1e-2]")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValidationError("need 0 < h_min <= h_init <= h_max")
        if self.direction not in ("forward", "backward"):
            raise ValidationError(f"unknown direction {self.direction!r}")
        if self.max_steps < 1:
            raise ValidationError("max_steps must be positive")

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "forward" else -1.0

    def replace(self, **changes) -> "IntegratorConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return IntegratorConfig(**values)


@dataclass
class Event:
    """Scalar event ``fn(t, x)``; a crossing is a sign change of ``fn``.

    ``direction`` restricts to rising (+1) or falling (-1) crossings.
    """

    fn: Callable[[float, np.ndarray], float]
    terminal: bool = True
    direction: int = 0
    name: str = ""


@dataclass
class EventRecord:
    name: str
    index: int
    t: float
    x: np.ndarray


@dataclass
class Trajectory:
    """Accepted steps of one integration, with dense output.

    ``t`` is strictly monotone in the integration direction. ``coeffs[k]``
    holds the five quartic interpolation vectors on step ``k``.
    """

    t: np.ndarray
    x: np.ndarray
    coeffs: np.ndarray
    events: list = field(default_factory=list)
    status: str = "completed"
    nfev: int = 0

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def x_final(self) -> np.ndarray:
        return self.x[-1]

    def __call__(self, t) -> np.ndarray:
        """Evaluate the dense output at ``t`` (scalar or 1-D array)."""
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        forward = self.t[-1] >= self.t[0]
        lo, hi = (self.t[0], self.t[-1]) if forward else (self.t[-1], self.t[0])
        span = max(abs(hi - lo), 1.0)
        if np.any(tt < lo - 1e-12 * span) or np.any(tt > hi + 1e-12 * span):
            raise ValueError("dense output requested outside the integrated span")
        if forward:
            k = np.searchsorted(self.t, tt, side="right") - 1
        else:
            k = np.searchsorted(-self.t, -tt, side="right") - 1
        k = np.clip(k, 0, len(self.t) - 2)
        h = self.t[k + 1] - self.t[k]
        theta = ((tt - self.t[k]) / h)[:, None]
        c = self.coeffs[k]
        out = c[:, 0] + theta * (
            c[:, 1] + (1 - theta) * (c[:, 2] + theta * (c[:, 3] + (1 - theta) * c[:, 4]))
        )
        return out[0] if np.ndim(t) == 0 else out


def _err_norm(err, scale):
    return float(np.max(np.abs(err) / scale))


_A_ROWS = tuple(np.array(a) for a in _A)
_E_ARR = np.array(_E)
_D_ARR = np.array(_D)


def _dense_coeffs(x0, x1, k, h):
    """Quartic interpolation vectors; vectorised over leading step axes.

    Shapes: ``x0, x1`` (..., d), ``k`` (..., 7, d), ``h`` scalar or (...,).
    """
    h = np.asarray(h, dtype=float)[..., None]
    dx = x1 - x0
    bspl = h * k[..., 0, :] - dx
    r5 = h * np.einsum("s,...sd->...d", _D_ARR, k)
    return np.stack((x0, dx, bspl, dx - h * k[..., 6, :] - bspl, r5), axis=-2)


def _step(f, t, x, h, k0):
    """One Dormand-Prince step. Returns (x_new, stages (7, d), error vector)."""
    k = np.empty((7, x.size))
    k[0] = k0
    for i in range(1, 7):
        xi = x + h * (_A_ROWS[i] @ k[:i])
        k[i] = f(t + _C[i] * h, xi)
    return xi, k, h * (_E_ARR @ k)


def _locate(event, t0, h, x0, x1, coeffs, sign, t_start):
    """Bisect the dense output on one step for a sign change of ``event``."""

    def g_at(theta):
        c = coeffs
        xv = c[0] + theta * (c[1] + (1 - theta) * (c[2] + theta * (c[3] + (1 - theta) * c[4])))
        return event.fn(t_start + sign * (t0 + theta * h), xv), xv

    a, b = 0.0, 1.0
    ga = event.fn(t_start + sign * t0, x0)
    xb = x1
    for _ in range(_EVENT_MAX_ITER):
        if (b - a) * abs(h) <= _EVENT_TOL:
            break
        m = 0.5 * (a + b)
        gm, xm = g_at(m)
        if gm == 0.0:
            a = b = m
            xb = xm
            break
        if (gm > 0) == (ga > 0):
            a, ga = m, gm
        else:
            b, xb = m, xm
    if b != 1.0:
        _, xb = g_at(b)
    return t0 + b * h, xb


def integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    x0,
    span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    events: Sequence[Event] = (),
    steps: np.ndarray | None = None,
) -> Trajectory:
    """Integrate ``x' = f(t, x)`` over ``span``.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(t, x) -> array``.
    x0 : array_like
        Initial state.
    span : (float, float)
        ``(start, end)``; ``end < start`` requires ``cfg.direction="backward"``.
        ``end`` may be infinite when a terminal event is expected.
    cfg : IntegratorConfig, optional
    events : sequence of Event
    steps : ndarray, optional
        Node sequence (same direction as ``span``, starting at ``span[0]``) to
        replay without error control. Past its last node the integration
        continues adaptively.

    Returns
    -------
    Trajectory

    Raises
    ------
    StepUnderflow, BudgetExceeded, NonFinite
    """
    cfg = cfg or IntegratorConfig()
    t_start, t_end = float(span[0]), float(span[1])
    sign = cfg.sign
    if (t_end - t_start) * sign < 0:
        raise ValidationError("span inconsistent with integration direction")
    length = abs(t_end - t_start)

    if sign > 0:
        F = lambda s, x: f(t_start + s, x)
    else:
        F = lambda s, x: -np.asarray(f(t_start - s, x), dtype=float)

    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFinite("initial state is not finite")
    replay = None
    if steps is not None:
        replay = np.abs(np.asarray(steps, dtype=float) - t_start)
        if replay.size < 2 or replay[0] != 0.0 or np.any(np.diff(replay) <= 0):
            raise ValidationError("replay steps must start at span[0] and be monotone")

    s = 0.0
    k0 = F(s, x)
    nfev = 1
    gvals = [ev.fn(t_start, x) for ev in events]

    ts = [0.0]
    xs = [x]
    ks = []
    trunc = None
    records: list[EventRecord] = []
    status = "completed"

    h = min(cfg.h_init, cfg.h_max, length) if length > 0 else 0.0
    n_steps = 0
    ri = 1
    done = length == 0.0
    while not done:
        if n_steps >= cfg.max_steps:
            raise BudgetExceeded(f"step budget {cfg.max_steps} exhausted at t={t_start + sign * s:.6g}")
        n_steps += 1
        fixed = replay is not None and ri < replay.size
        if fixed:
            h = replay[ri] - s
        last = s + h >= length
        if last:
            h = length - s
        # overflow inside a trial step is handled by rejection or NonFinite below
        with np.errstate(over="ignore", invalid="ignore"):
            x_new, k, err = _step(F, s, x, h, k0)
        nfev += 6
        if not fixed:
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(x), np.abs(x_new))
            en = _err_norm(err, scale)
            if not math.isfinite(en):
                en = 1e10
            if en > 1.0:
                h_new = h * max(_FAC_MIN, _SAFETY * en ** -0.2)
                if h_new < cfg.h_min:
                    raise StepUnderflow(f"step size {h_new:.3g} below h_min at t={t_start + sign * s:.6g}")
                h = h_new
                continue
        if not np.all(np.isfinite(x_new)):
            raise NonFinite(f"non-finite state at t={t_start + sign * (s + h):.6g}")
        coeffs = None
        if last:
            s_new = length
        elif fixed:
            s_new = replay[ri]
        else:
            s_new = s + h
        stop = False
        for i, ev in enumerate(events):
            g_new = ev.fn(t_start + sign * s_new, x_new)
            g_old = gvals[i]
            gvals[i] = g_new
            crossed = (g_old < 0 <= g_new) or (g_old > 0 >= g_new)
            if not crossed or g_old == 0.0:
                continue
            rising = g_new > g_old
            if ev.direction and (ev.direction > 0) != rising:
                continue
            if coeffs is None:
                coeffs = _dense_coeffs(x, x_new, k, h)
            s_ev, x_ev = _locate(ev, s, h, x, x_new, coeffs, sign, t_start)
            records.append(EventRecord(ev.name or f"event{i}", i, t_start + sign * s_ev, x_ev))
            if ev.terminal:
                stop = True
        if stop:
            # truncate at the earliest terminal event
            term = [r for r in records if events[r.index].terminal]
            first = min(term, key=lambda r: sign * r.t)
            s_stop = abs(first.t - t_start)
            x_stop = first.x
            if s_stop > s:
                ts.append(s_stop)
                xs.append(x_stop)
                # re-express the quartic on the shortened step
                trunc = _truncate(coeffs, (s_stop - s) / h)
            records = [r for r in records if sign * r.t <= sign * first.t]
            status = "event"
            break
        ts.append(s_new)
        xs.append(x_new)
        ks.append(k)
        s = s_new
        x = x_new
        k0 = k[6]
        if fixed:
            ri += 1
        else:
            h = min(cfg.h_max, h * min(_FAC_MAX, _SAFETY * max(en, 1e-10) ** -0.2))
        done = last

    s_arr = np.asarray(ts)
    x_arr = np.asarray(xs)
    m = len(ks)
    if m:
        # theta is a fraction of the step, so coefficients built in s serve t too
        coeffs = _dense_coeffs(x_arr[:m], x_arr[1 : m + 1], np.asarray(ks), np.diff(s_arr[: m + 1]))
    else:
        coeffs = np.zeros((0, 5, x.size))
    if trunc is not None:
        coeffs = np.concatenate((coeffs, trunc[None]), axis=0)
    return Trajectory(
        t=t_start + sign * s_arr,
        x=x_arr,
        coeffs=coeffs,
        events=records,
        status=status,
        nfev=nfev,
    )


def _truncate(c, frac):
    """Quartic coefficients of the sub-step ``theta in [0, frac]`` rescaled to [0, 1]."""
    theta = np.linspace(0.0, frac, 5)
    vals = c[0] + theta[:, None] * (
        c[1] + (1 - theta[:, None]) * (c[2] + theta[:, None] * (c[3] + (1 - theta[:, None]) * c[4]))
    )
    # fit the same quartic family through five points on the new unit step
    u = np.linspace(0.0, 1.0, 5)
    basis = np.stack(
        [np.ones_like(u), u, u * (1 - u), u * (1 - u) * u, u * (1 - u) * u * (1 - u)], axis=1
    )
    return np.linalg.solve(basis, vals)


def integrate_to_event(
    f,
    x0,
    cfg: IntegratorConfig | None = None,
    event: Event | Callable | None = None,
    t0: float = 0.0,
    t_max: float = 1e6,
) -> tuple[np.ndarray, float]:
    """Integrate until the first crossing of ``event``.

    Returns
    -------
    (state, location)

    Raises
    ------
    EventNotFound
        When the span ``t_max`` or the step budget is exhausted first.
    """
    cfg = cfg or IntegratorConfig()
    if not isinstance(event, Event):
        event = Event(event, terminal=True)
    end = t0 + cfg.sign * t_max
    try:
        traj = integrate(f, x0, (t0, end), cfg, events=[event])
    except BudgetExceeded as exc:
        raise EventNotFound(f"no event crossing within the step budget ({exc})") from exc
    if traj.status != "event":
        raise EventNotFound("no event crossing within the integration span")
    rec = traj.events[-1]
    return rec.x, rec.t
