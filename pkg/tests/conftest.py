from __future__ import annotations

import pytest

from shearband.heteroclinic import build_translated_orbit
from shearband.model import validate
from shearband.reconstruct import profile_from_orbit

FIG3 = (0.3, 2.0)
FIG4 = (0.05, 10.0)


@pytest.fixture(scope="session")
def fig3_params():
    return validate(FIG3[0], lam=FIG3[1])


@pytest.fixture(scope="session")
def fig3_orbit(fig3_params):
    return build_translated_orbit(fig3_params)


@pytest.fixture(scope="session")
def fig3_profile(fig3_orbit, fig3_params):
    return profile_from_orbit(fig3_orbit, fig3_params)


@pytest.fixture(scope="session")
def fig4_params():
    return validate(FIG4[0], lam=FIG4[1])


@pytest.fixture(scope="session")
def fig4_orbit(fig4_params):
    return build_translated_orbit(fig4_params)


@pytest.fixture(scope="session")
def fig4_profile(fig4_orbit, fig4_params):
    return profile_from_orbit(fig4_orbit, fig4_params)
