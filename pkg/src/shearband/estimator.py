"""scikit-learn style wrapper around the localizing-solution pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ValidationError
from .heteroclinic import ORBIT_CONFIG, build_translated_orbit
from .model import validate
from .reconstruct import fields_at, profile_from_orbit


class LocalizingSolution(TransformerMixin, BaseEstimator):
    """Self-similar localizing shear solution for given material data.

    ``fit`` ignores its data arguments: the solution is determined by the
    hyperparameters alone, so fitting means constructing the heteroclinic
    orbit and the profiles. ``predict`` and ``transform`` evaluate the
    physical fields at rows ``(x, t)``.

    Parameters
    ----------
    n : float
        Rate sensitivity, ``0 < n < 1``.
    lam : float
        Self-similarity exponent, ``0 < lam < (2-n)(1-n)/n``.
    gamma_bar0 : float
        Strain profile at the centre.
    gamma0 : float
        Initial strain of the uniform state.
    method : {"auto", "backward", "forward"}
        Orbit construction route.
    delta_seed : float
        Distance of the seed from the saddle.
    rtol, atol : float or None
        Integrator tolerances; ``None`` keeps the package defaults.

    Attributes
    ----------
    orbit_, kappa2_, eta0_, profile_, params_
    """

    def __init__(self, n=0.3, lam=2.0, gamma_bar0=1.0, gamma0=1.0, method="auto", delta_seed=1e-6,
                 rtol=None, atol=None):
        self.n = n
        self.lam = lam
        self.gamma_bar0 = gamma_bar0
        self.gamma0 = gamma0
        self.method = method
        self.delta_seed = delta_seed
        self.rtol = rtol
        self.atol = atol

    def fit(self, X=None, y=None):
        params = validate(self.n, lam=self.lam, gamma_bar0=self.gamma_bar0, gamma0=self.gamma0)
        cfg = ORBIT_CONFIG
        changes = {k: v for k, v in (("rel_tol", self.rtol), ("abs_tol", self.atol)) if v is not None}
        if changes:
            cfg = cfg.replace(**changes)
        orbit = build_translated_orbit(params, method=self.method, delta_seed=self.delta_seed, cfg=cfg)
        self.params_ = params
        self.orbit_ = orbit
        self.kappa2_ = float(orbit.diagnostics["kappa2_raw"])
        self.eta0_ = float(orbit.eta0)
        self.profile_ = profile_from_orbit(orbit, params)
        return self

    def predict(self, X):
        """Fields ``(v, gamma, sigma, u)`` at rows ``(x, t)``; shape ``(m, 4)``."""
        check_is_fitted(self, "profile_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValidationError("expected an array of (x, t) rows")
        out = np.empty((X.shape[0], 4))
        # group rows by time so each frame is reconstructed once
        times, inv = np.unique(X[:, 1], return_inverse=True)
        for k, t in enumerate(times):
            rows = inv == k
            fr = fields_at(self.profile_, X[rows, 0], t)
            out[rows] = np.column_stack((fr.v, fr.gamma, fr.sigma, fr.u))
        return out

    def transform(self, X):
        return self.predict(X)
