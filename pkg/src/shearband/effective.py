"""Fourth-order effective equation for the relaxation system.

Evaluates ``(U^-(1-n))_yy + eps (U^-(2-n) (U^-(1-n))_yy)_yy`` on a grid and
reports the band-limited linear dispersion relation. Only a diagnostic; the
equation is never time-stepped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class EffectiveDispersion:
    n: float
    epsilon: float

    @property
    def cutoff_xi(self) -> float:
        return cutoff(self.n, self.epsilon)

    @property
    def sufficient_bound(self) -> float:
        return math.sqrt(1.0 + 1.0 / self.epsilon + 1.0 / (1.0 - self.n))

    def __call__(self, xi):
        return linear_symbol(xi, self.n, self.epsilon)


def _second_difference(w, dy, boundary):
    if boundary == "periodic":
        return (np.roll(w, -1) - 2.0 * w + np.roll(w, 1)) / dy**2
    if boundary == "neumann":
        # even reflection about the end nodes
        ext = np.concatenate(([w[1]], w, [w[-2]]))
        return (ext[2:] - 2.0 * ext[1:-1] + ext[:-2]) / dy**2
    raise DomainError(f"unknown boundary {boundary!r}")


def effective_rhs(U, n: float, epsilon: float, dy: float, boundary: str = "periodic"):
    """Right side of the effective equation by nested central differences.

    Parameters
    ----------
    U : ndarray
        Positive samples on a uniform grid. For ``boundary="periodic"`` the
        last node is the one before the period repeats.
    boundary : {"periodic", "neumann"}
    """
    U = np.asarray(U, dtype=float)
    if np.any(U <= 0):
        raise DomainError("effective operator needs U > 0")
    w = U ** (-(1.0 - n))
    w_yy = _second_difference(w, dy, boundary)
    return w_yy + epsilon * _second_difference(U ** (-(2.0 - n)) * w_yy, dy, boundary)


def linear_symbol(xi, n: float, epsilon: float):
    """Published linear growth rate ``((1-n) + eps(2-n)) xi^2 - eps (1-n) xi^4``."""
    xi = np.asarray(xi, dtype=float)
    out = ((1.0 - n) + epsilon * (2.0 - n)) * xi**2 - epsilon * (1.0 - n) * xi**4
    return float(out) if out.ndim == 0 else out


def operator_symbol(xi, n: float, epsilon: float):
    """Symbol of the linearisation of :func:`effective_rhs` about ``U = 1``.

    ``(1-n) xi^2 - eps (1-n) xi^4``; differs from :func:`linear_symbol` by
    ``eps (2-n) xi^2``.
    """
    xi = np.asarray(xi, dtype=float)
    out = (1.0 - n) * xi**2 - epsilon * (1.0 - n) * xi**4
    return float(out) if out.ndim == 0 else out


def cutoff(n: float, epsilon: float) -> float:
    """Positive root of :func:`linear_symbol`."""
    if not 0 < n < 1 or epsilon <= 0:
        raise DomainError("need 0 < n < 1 and epsilon > 0")
    return math.sqrt(((1.0 - n) + epsilon * (2.0 - n)) / (epsilon * (1.0 - n)))
