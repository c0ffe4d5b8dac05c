"""Model parameters, constitutive law and the uniform shearing base state.

All quantities are dimensionless. The stress law is ``sigma = gamma**-1 *
gamma_t**n`` (strain softening ``1/gamma`` with rate sensitivity ``n``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .errors import ConstraintViolation, DomainError, Overdetermined

_CONSISTENCY_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Validated parameters of a focusing self-similar solution.

    Only ``(n, lam, gamma_bar0, gamma0)`` are stored; ``u_bar0`` follows from
    the compatibility relation and cannot disagree with ``lam``. Build
    instances through :func:`validate`.

    Parameters
    ----------
    n : float
        Strain-rate sensitivity, ``0 < n < 1``.
    lam : float
        Focusing rate, ``0 < lam < (2-n)(1-n)/n``.
    gamma_bar0 : float
        Profile strain at the origin.
    gamma0 : float
        Base strain of the uniform shearing state.
    """

    n: float
    lam: float
    gamma_bar0: float = 1.0
    gamma0: float = 1.0

    @property
    def r0(self) -> float:
        """Ratio ``u_bar0 / gamma_bar0 = 1 + 2 lam / (2 - n)``."""
        return 1.0 + 2.0 * self.lam / (2.0 - self.n)

    @property
    def u_bar0(self) -> float:
        return self.gamma_bar0 * self.r0

    @property
    def sigma_bar0(self) -> float:
        return self.u_bar0**self.n / self.gamma_bar0

    @property
    def kappa(self) -> float:
        """Near-origin amplitude ``gamma_bar0 * u_bar0**(1-n)``."""
        return self.gamma_bar0 * self.u_bar0 ** (1.0 - self.n)

    @property
    def lam_max(self) -> float:
        return lambda_upper_bound(self.n)

    def rescaled(self, A: float) -> "ModelParams":
        """Data of the profile ``A**(2/(2-n)) * G(A xi)`` (same ``lam``)."""
        if A <= 0:
            raise DomainError("scaling factor must be positive")
        return validate(
            self.n, lam=self.lam, gamma_bar0=self.gamma_bar0 * A ** (2.0 / (2.0 - self.n)),
            gamma0=self.gamma0,
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(u_bar0=self.u_bar0, sigma_bar0=self.sigma_bar0, kappa=self.kappa)
        return d


def lambda_upper_bound(n: float) -> float:
    """Largest admissible focusing rate, ``(2-n)(1-n)/n``."""
    if not 0 < n < 1:
        raise DomainError("rate sensitivity must satisfy 0 < n < 1")
    return (2.0 - n) * (1.0 - n) / n


def lambda_from_data(n: float, gamma_bar0: float, u_bar0: float) -> float:
    return 0.5 * (2.0 - n) * (u_bar0 / gamma_bar0 - 1.0)


def validate(
    n: float,
    lam: float | None = None,
    gamma_bar0: float | None = None,
    u_bar0: float | None = None,
    gamma0: float | None = None,
) -> ModelParams:
    """Check admissibility and complete the parameter set.

    Accepts ``(n, lam[, gamma_bar0])``, ``(n, gamma_bar0, u_bar0)`` or
    ``(n, lam, u_bar0)``. Missing ``gamma_bar0`` defaults to 1 when it cannot
    be derived; ``gamma0`` defaults to 1.

    Raises
    ------
    ConstraintViolation
        Names the violated inequality.
    Overdetermined
        All of ``lam``, ``gamma_bar0``, ``u_bar0`` given and inconsistent.
    """
    n = float(n)
    gamma0 = 1.0 if gamma0 is None else float(gamma0)
    if not math.isfinite(n) or not 0.0 < n < 1.0:
        raise ConstraintViolation(f"0 < n < 1 violated (n={n})")
    if not gamma0 > 0:
        raise ConstraintViolation(f"gamma0 > 0 violated (gamma0={gamma0})")
    for name, val in (("gamma_bar0", gamma_bar0), ("u_bar0", u_bar0)):
        if val is not None and not float(val) > 0:
            raise ConstraintViolation(f"{name} > 0 violated ({name}={val})")

    if lam is None:
        if u_bar0 is None:
            raise ConstraintViolation("need lambda or both gamma_bar0 and u_bar0")
        if gamma_bar0 is None:
            gamma_bar0 = 1.0
        lam = lambda_from_data(n, float(gamma_bar0), float(u_bar0))
    else:
        lam = float(lam)
        r0 = 1.0 + 2.0 * lam / (2.0 - n)
        if gamma_bar0 is None:
            gamma_bar0 = 1.0 if u_bar0 is None else float(u_bar0) / r0
        elif u_bar0 is not None:
            implied = float(gamma_bar0) * r0
            if abs(implied - float(u_bar0)) > _CONSISTENCY_RTOL * abs(float(u_bar0)):
                raise Overdetermined(
                    f"u_bar0={u_bar0} disagrees with gamma_bar0*(1+2*lambda/(2-n))={implied}"
                )

    bound = lambda_upper_bound(n)
    if not lam > 0:
        raise ConstraintViolation(f"lambda > 0 violated (lambda={lam}); u_bar0/gamma_bar0 must exceed 1")
    if not lam < bound:
        raise ConstraintViolation(
            f"lambda < (2-n)(1-n)/n violated (lambda={lam}, bound={bound:.6g})"
        )
    return ModelParams(n=n, lam=lam, gamma_bar0=float(gamma_bar0), gamma0=gamma0)


def params_from_mapping(values: Mapping[str, object]) -> ModelParams:
    """Validate a flat mapping with keys n, lambda, gamma_bar0, u_bar0, gamma0."""
    get = lambda k: None if values.get(k) is None else float(values[k])
    if get("n") is None:
        raise ConstraintViolation("missing rate sensitivity n")
    return validate(get("n"), get("lambda"), get("gamma_bar0"), get("u_bar0"), get("gamma0"))


# -- constitutive law and base state ------------------------------------------


def sigma_constitutive(gamma, gamma_t, n):
    """Stress ``gamma**-1 * gamma_t**n``."""
    gamma = np.asarray(gamma, dtype=float)
    gamma_t = np.asarray(gamma_t, dtype=float)
    if np.any(gamma <= 0):
        raise DomainError("strain must be positive")
    if np.any(gamma_t < 0):
        raise DomainError("strain rate must be non-negative")
    return gamma_t**n / gamma


@dataclass(frozen=True)
class UniformShear:
    """Uniform shearing: ``v = x``, ``gamma = t + gamma0``, ``sigma = 1/(t + gamma0)``."""

    gamma0: float = 1.0

    def v(self, x, t=0.0):
        return np.asarray(x, dtype=float) + 0.0 * np.asarray(t, dtype=float)

    def u(self, x, t=0.0):
        return np.ones(np.broadcast(np.asarray(x), np.asarray(t)).shape)

    def gamma(self, t):
        return np.asarray(t, dtype=float) + self.gamma0

    def sigma(self, t):
        return 1.0 / self.gamma(t)


def tau_of_t(t, gamma0: float = 1.0):
    """Logarithmic time ``log(1 + t/gamma0)``."""
    t = np.asarray(t, dtype=float)
    if gamma0 <= 0:
        raise DomainError("gamma0 must be positive")
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    out = np.log1p(t / gamma0)
    return float(out) if out.ndim == 0 else out


def t_of_tau(tau, gamma0: float = 1.0):
    tau = np.asarray(tau, dtype=float)
    if gamma0 <= 0:
        raise DomainError("gamma0 must be positive")
    if np.any(tau < 0):
        raise DomainError("tau must be non-negative")
    out = gamma0 * np.expm1(tau)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RescaleMap:
    """Map between physical fields and perturbations relative to uniform shear.

    ``U = u``, ``Gamma = gamma/(t+gamma0)``, ``Sigma = sigma*(t+gamma0)`` and
    ``tau = log(1 + t/gamma0)``. In these variables ``U_tau = Sigma_xx``,
    ``Gamma_tau = U - Gamma`` and ``Sigma = U**n / Gamma``.
    """

    gamma0: float = 1.0

    def tau(self, t):
        return tau_of_t(t, self.gamma0)

    def t(self, tau):
        return t_of_tau(tau, self.gamma0)

    def to_relative(self, u, gamma, sigma, t):
        s = np.asarray(t, dtype=float) + self.gamma0
        return np.asarray(u, dtype=float), np.asarray(gamma) / s, np.asarray(sigma) * s

    def from_relative(self, U, Gamma, Sigma, tau):
        s = self.gamma0 * np.exp(np.asarray(tau, dtype=float))
        return np.asarray(U, dtype=float), np.asarray(Gamma) * s, np.asarray(Sigma) / s
