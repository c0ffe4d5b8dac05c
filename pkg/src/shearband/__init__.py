"""Shear-band localization in rate-sensitive viscoplastic shear.

Linear stability of uniform shearing, the effective backward-parabolic
equation, the phase-space construction of self-similar localizing
solutions, their reconstruction in physical variables and a finite
difference cross-check.
"""

from __future__ import annotations

from .errors import NumericalError, ShearBandError, ValidationError
from .estimator import LocalizingSolution
from .heteroclinic import Orbit, build_translated_orbit, clear_orbit_cache, construct_orbit
from .linstab import eigenvalues, spectrum, turing_bound
from .model import ModelParams, UniformShear, validate
from .pqr import equilibria, vector_field
from .reconstruct import Profile, fields_at, profile_from_orbit

__version__ = "0.1.0"

__all__ = [
    "LocalizingSolution",
    "ModelParams",
    "NumericalError",
    "Orbit",
    "Profile",
    "ShearBandError",
    "UniformShear",
    "ValidationError",
    "build_translated_orbit",
    "clear_orbit_cache",
    "construct_orbit",
    "eigenvalues",
    "equilibria",
    "fields_at",
    "profile_from_orbit",
    "spectrum",
    "turing_bound",
    "validate",
    "vector_field",
]
