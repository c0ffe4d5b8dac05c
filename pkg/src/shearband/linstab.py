"""Linear stability of the uniform shearing state.

Perturbations ``U = 1 + U_j cos(j pi x)``, ``Gamma = 1 + G_j cos(j pi x)``
satisfy ``d/dtau (U_j, G_j) = A_j (U_j, G_j)`` with
``A_j = [[-n j^2 pi^2, j^2 pi^2], [1, -1]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError


class Regime(str, Enum):
    HADAMARD = "Hadamard"
    TURING = "Turing"
    STABLE = "Stable"


@dataclass(frozen=True)
class ModeEntry:
    j: int
    lambda_plus: float
    lambda_minus: float
    eigvec_plus: tuple
    eigvec_minus: tuple
    constrained: bool = False


@dataclass(frozen=True)
class ModeSpectrum:
    n: float
    entries: list = field(default_factory=list)

    def growth_rates(self) -> np.ndarray:
        return np.array([e.lambda_plus for e in self.entries])


def _check_n(n):
    if n < 0:
        raise DomainError("rate sensitivity must be non-negative")


def mode_matrix(j: int, n: float) -> np.ndarray:
    _check_n(n)
    k2 = (j * math.pi) ** 2
    return np.array([[-n * k2, k2], [1.0, -1.0]])


def characteristic(lam, j: int, n: float):
    """``lam^2 + lam (1 + n pi^2 j^2) - (1-n) pi^2 j^2``."""
    k2 = (j * math.pi) ** 2
    return lam * lam + lam * (1.0 + n * k2) - (1.0 - n) * k2


def eigenvalues(j: int, n: float) -> tuple[float, float]:
    """Growth and decay eigenvalues ``(lambda_plus, lambda_minus)`` of mode ``j``.

    The larger-magnitude root is formed without cancellation and the other
    from the product of roots.
    """
    _check_n(n)
    if j == 0:
        return 0.0, -1.0
    k2 = (j * math.pi) ** 2
    b = 1.0 + n * k2
    c = -(1.0 - n) * k2
    disc = b * b - 4.0 * c
    lam_minus = -0.5 * (b + math.sqrt(disc))
    lam_plus = c / lam_minus
    return lam_plus, lam_minus


def eigenvalues_array(j, n: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`eigenvalues` for ``j >= 1``."""
    _check_n(n)
    k2 = (np.asarray(j, dtype=float) * np.pi) ** 2
    b = 1.0 + n * k2
    c = -(1.0 - n) * k2
    lam_minus = -0.5 * (b + np.sqrt(b * b - 4.0 * c))
    return c / lam_minus, lam_minus


def eigenvector(mu: float) -> np.ndarray:
    """Unit eigenvector of any mode matrix for eigenvalue ``mu``.

    From the second row, ``U = (1 + mu) Gamma``. Sign: first nonzero
    component positive.
    """
    v = np.array([1.0 + mu, 1.0])
    v /= np.linalg.norm(v)
    first = v[0] if v[0] != 0 else v[1]
    return v if first > 0 else -v


def spectrum(n: float, jmax: int) -> ModeSpectrum:
    """Closed-form spectrum for modes ``0..jmax``; mode 0 is flagged constrained."""
    _check_n(n)
    entries = []
    for j in range(0, int(jmax) + 1):
        lp, lm = eigenvalues(j, n)
        entries.append(
            ModeEntry(j, lp, lm, tuple(eigenvector(lp)), tuple(eigenvector(lm)), constrained=(j == 0))
        )
    return ModeSpectrum(n=n, entries=entries)


def turing_bound(n: float) -> float:
    """Supremum ``(1-n)/n`` of the growth rates."""
    if n == 0:
        raise DomainError("growth rates are unbounded at n = 0")
    if not 0 < n < 1:
        raise DomainError("bound defined for 0 < n < 1")
    return (1.0 - n) / n


def classify(n: float) -> Regime:
    _check_n(n)
    if n == 0:
        return Regime.HADAMARD
    if n < 1:
        return Regime.TURING
    return Regime.STABLE


def hadamard_asymptotics(j: int) -> tuple[float, float]:
    """Three-term large-``j`` expansion of both eigenvalues at ``n = 0``.

    ``+- pi j - 1/2 +- 1/(8 pi j)``.
    """
    if j < 1:
        raise DomainError("expansion requires j >= 1")
    a = math.pi * j
    return a - 0.5 + 1.0 / (8.0 * a), -a - 0.5 - 1.0 / (8.0 * a)


def split_matrices(j: int, n: float) -> tuple[np.ndarray, np.ndarray]:
    """Flux and relaxation parts whose sum is :func:`mode_matrix`."""
    k2 = (j * math.pi) ** 2
    return np.array([[-n * k2, k2], [0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, -1.0]])


def growth_in_t(lambda_plus: float, t, gamma0: float = 1.0):
    """Amplification factor in physical time, ``(1 + t/gamma0)**lambda_plus``."""
    return (1.0 + np.asarray(t, dtype=float) / gamma0) ** lambda_plus
