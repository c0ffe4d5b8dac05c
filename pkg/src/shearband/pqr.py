"""Autonomous (p, q, r) system for self-similar profiles.

With ``a = lam/(2-n)`` and ``b = 1 - n/(2-n)``::

    p' = p ((r-1)/lam + b - lam p r - a q)
    q' = q (1 - lam p r - a q) + n p r
    r' = r ((1-n)(r-1)/lam - b + lam p r + a q) / n

The plane ``p = 0`` is invariant. There are four equilibria M0..M3 with
closed-form spectra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ComplexSpectrum, DegenerateLambda

_DEGENERATE_TOL = 1e-10


class PhasePoint(NamedTuple):
    p: float
    q: float
    r: float


def _consts(n, lam):
    return lam / (2.0 - n), 1.0 - n / (2.0 - n)


def vector_field(x, n: float, lam: float) -> np.ndarray:
    """Rates ``(p', q', r')`` at ``x``; accepts shape ``(3,)`` or ``(3, m)``."""
    p, q, r = np.asarray(x, dtype=float)
    a, b = _consts(n, lam)
    lpr = lam * p * r
    return np.array(
        [
            p * ((r - 1.0) / lam + b - lpr - a * q),
            q * (1.0 - lpr - a * q) + n * p * r,
            r * ((1.0 - n) * (r - 1.0) / lam - b + lpr + a * q) / n,
        ]
    )


def make_field(n: float, lam: float):
    """Fast right-hand side ``f(eta, x)`` for the integrator; returns a list."""
    a, b = _consts(n, lam)
    c = (1.0 - n) / lam
    inv_lam = 1.0 / lam

    def f(_eta, x):
        p, q, r = x.tolist()
        lpr = lam * p * r
        aq = a * q
        return [
            p * ((r - 1.0) * inv_lam + b - lpr - aq),
            q * (1.0 - lpr - aq) + n * p * r,
            r * (c * (r - 1.0) - b + lpr + aq) / n,
        ]

    return f


def make_field_m1(n: float, lam: float):
    """Field in deviation coordinates ``y = x - M1``.

    The bracket constants that vanish at M1 are removed analytically, so
    deviations far below the unit roundoff of M1's coordinates stay resolved.
    """
    a, b = _consts(n, lam)
    q1 = (2.0 - n) / lam
    r1 = _r1(n, lam)
    bp0 = -n / (1.0 - n)  # p-bracket at M1
    c = (1.0 - n) / lam
    inv_lam = 1.0 / lam

    def f(_eta, y):
        p, yq, yr = y.tolist()
        q = q1 + yq
        r = r1 + yr
        lpr = lam * p * r
        ayq = a * yq
        return [
            p * (bp0 + yr * inv_lam - lpr - ayq),
            q * (-lpr - ayq) + n * p * r,
            r * (c * yr + lpr + ayq) / n,
        ]

    return f


def jacobian(x, n: float, lam: float) -> np.ndarray:
    p, q, r = (float(v) for v in x)
    a, b = _consts(n, lam)
    bp = (r - 1.0) / lam + b - lam * p * r - a * q
    bq = 1.0 - lam * p * r - a * q
    br = (1.0 - n) * (r - 1.0) / lam - b + lam * p * r + a * q
    return np.array(
        [
            [bp - lam * p * r, -a * p, p * (1.0 / lam - lam * p)],
            [-lam * q * r + n * r, bq - a * q, -lam * p * q + n * p],
            [lam * r * r / n, a * r / n, (br + r * ((1.0 - n) / lam + lam * p)) / n],
        ]
    )


# -- equilibria ----------------------------------------------------------------


def _r0(n, lam):
    return 1.0 + 2.0 * lam / (2.0 - n)


def _r1(n, lam):
    return 1.0 - n * lam / ((2.0 - n) * (1.0 - n))


def degenerate_lambda(n: float) -> float:
    """Value of ``lam`` at which M3's first eigenvalue vanishes."""
    return 1.0 + n / (2.0 * (1.0 - n))


@dataclass(frozen=True)
class Equilibrium:
    """Equilibrium with closed-form spectrum.

    ``raw_vectors`` are the unnormalised component formulas (rows);
    ``vectors`` are unit rows with the p-component (else q, else r) positive.
    """

    label: str
    point: np.ndarray
    eigenvalues: np.ndarray
    raw_vectors: np.ndarray
    vectors: np.ndarray
    kind: str

    def pairs(self):
        return list(zip(self.eigenvalues, self.vectors))


def _normalise(v):
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    for comp in v:
        if abs(comp) > 1e-14:
            return v if comp > 0 else -v
    return v


def _classify(mu):
    s = np.sign(mu)
    if np.all(s > 0):
        return "unstable node"
    if np.all(s < 0):
        return "stable node"
    return "saddle"


def closed_form_pairs(label: str, n: float, lam: float):
    """Unnormalised closed-form eigenpairs ``[(mu, X), ...]`` of one equilibrium."""
    r0, r1 = _r0(n, lam), _r1(n, lam)
    nn = n / (1.0 - n)
    lfac = lam / (1.0 - n) * lam / (2.0 - n)
    e = np.eye(3)
    if label == "M0":
        return [
            (1.0, np.array([0.0, 1.0, -lfac / (1.0 - nn * lam / r0)])),
            (2.0, np.array([1.0 / r0, n, -lfac / (0.5 - nn * lam / r0)])),
            ((1.0 - n) * r0 / (lam * n), e[2].copy()),
        ]
    if label == "M1":
        return [
            (-1.0, np.array([0.0, 1.0, -lfac / (1.0 + nn * lam / r1)])),
            (
                -nn,
                # no (2-n)/lam factor on the p-component: it would break J X = mu X
                np.array(
                    [
                        -(1.0 / r1) * (2.0 - 1.0 / (1.0 - n)),
                        2.0 * (1.0 - n),
                        -nn * lfac / (1.0 + nn * nn * lam / r1),
                    ]
                ),
            ),
            ((1.0 - n) * r1 / (lam * n), e[2].copy()),
        ]
    if label == "M2":
        return [
            (-(1.0 / lam) * (1.0 + n * lam / (2.0 - n)), e[0].copy()),
            (-1.0, e[1].copy()),
            (-(1.0 / n) * (1.0 - n) * r1 / lam, e[2].copy()),
        ]
    if label == "M3":
        return [
            (-(1.0 / lam) * (1.0 - 2.0 * (1.0 - n) * lam / (2.0 - n)), e[0].copy()),
            (1.0, e[1].copy()),
            (-(1.0 / n) * (1.0 - n) * r0 / lam, e[2].copy()),
        ]
    raise ValueError(f"unknown equilibrium {label!r}")


def equilibrium_point(label: str, n: float, lam: float) -> np.ndarray:
    q1 = (2.0 - n) / lam
    return {
        "M0": np.array([0.0, 0.0, _r0(n, lam)]),
        "M1": np.array([0.0, q1, _r1(n, lam)]),
        "M2": np.array([0.0, q1, 0.0]),
        "M3": np.zeros(3),
    }[label]


def equilibria(n: float, lam: float) -> list[Equilibrium]:
    """The four equilibria M0, M1, M2, M3 with their spectra.

    Raises
    ------
    DegenerateLambda
        If ``lam`` is within 1e-10 of ``1 + n/(2(1-n))``.
    """
    if abs(lam - degenerate_lambda(n)) <= _DEGENERATE_TOL:
        raise DegenerateLambda(
            f"lambda={lam} coincides with 1 + n/(2(1-n)); M3 is not isolated"
        )
    out = []
    for label in ("M0", "M1", "M2", "M3"):
        pairs = closed_form_pairs(label, n, lam)
        mu = np.array([m for m, _ in pairs])
        raw = np.array([v for _, v in pairs])
        unit = np.array([_normalise(v) for v in raw])
        out.append(Equilibrium(label, equilibrium_point(label, n, lam), mu, raw, unit, _classify(mu)))
    return out


def dual_basis(vectors: np.ndarray) -> np.ndarray:
    """Rows ``w_i`` with ``w_i . X_j = delta_ij`` for eigenvector rows ``X_j``."""
    return np.linalg.inv(np.asarray(vectors, dtype=float).T)


# -- numeric oracle --------------------------------------------------------------


def eigen_oracle(J) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs from characteristic-polynomial roots and inverse iteration.

    Independent of the closed forms; used for validation. Each root is
    refined by inverse iteration followed by a Rayleigh quotient.

    Raises
    ------
    ComplexSpectrum
        When a root cannot be refined to a real eigenpair.
    """
    J = np.asarray(J, dtype=float)
    scale = max(1.0, float(np.max(np.abs(J))))
    c2 = 0.5 * (np.trace(J) ** 2 - np.trace(J @ J))
    coeffs = [1.0, -np.trace(J), c2, -np.linalg.det(J)]
    roots = np.roots(coeffs)
    pairs = []
    rng_vec = np.array([0.5773502691896258, 0.5773502691896257, 0.5773502691896259])
    for root in sorted(roots, key=lambda z: (z.real, z.imag)):
        mu = float(root.real)
        shift = mu + 1e-10 * scale
        x = rng_vec.copy()
        for _ in range(6):
            try:
                y = np.linalg.solve(J - shift * np.eye(3), x)
            except np.linalg.LinAlgError:
                y = np.linalg.lstsq(J - shift * np.eye(3), x, rcond=None)[0]
            nrm = np.linalg.norm(y)
            if not math.isfinite(nrm) or nrm == 0:
                break
            x = y / nrm
        rq = float(x @ J @ x)
        res = np.linalg.norm(J @ x - rq * x)
        if res > 1e-8 * scale:
            kind = "is not real" if abs(root.imag) > 1e-8 * max(1.0, abs(root)) else "could not be refined"
            raise ComplexSpectrum(f"eigenvalue near {root} {kind}")
        pairs.append((_newton_polish(coeffs, rq), _normalise(x)))
    return pairs


def _newton_polish(coeffs, mu):
    """Newton steps on the characteristic polynomial, kept only while they help."""
    poly = np.poly1d(coeffs)
    d = poly.deriv()
    for _ in range(3):
        dv = d(mu)
        if dv == 0:
            break
        cand = mu - poly(mu) / dv
        if not math.isfinite(cand) or abs(poly(cand)) >= abs(poly(mu)):
            break
        mu = cand
    return float(mu)
