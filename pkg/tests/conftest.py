import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fbwave import (
    DiffusivityModel,
    FluxModel,
    VelocityLaw,
    build_diffusivity,
    build_flux,
    check_existence_D1,
    check_existence_D2,
    cubic_end_states,
    sign_pattern,
    constant_sign_case,
    xi_of_phi,
)

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = os.path.join(os.path.dirname(__file__), "data")

# cubic benchmark: f = rho (1 - rho)^2, alpha = 0.75, mu = -0.25
ALPHA = 0.75
MU = -0.25
SIGMA = 0.25 ** 3 / 0.75


def cubic_models():
    v = VelocityLaw.quadratic()
    return build_flux(v), build_diffusivity("HvSquared", v, sigma=SIGMA, h=1.0)


def d2_models():
    """Quartic flux collinear at 0.1, 0.3, 0.6, 0.9 with c = 0.2; D = (rho - 0.3)(rho - 0.6)."""
    w = np.polynomial.polynomial.polyfromroots([0.1, 0.3, 0.6, 0.9]) * -2.0
    w[1] += 0.2
    w[0] = 0.0
    f = FluxModel.polynomial(list(w))
    D = DiffusivityModel.polynomial(list(np.polynomial.polynomial.polyfromroots([0.3, 0.6])))
    return f, D


def a1_models(d0=0.0):
    """Linear law with D = rho (2 - rho) + d0; constant sign on (0, 0.6)."""
    v = VelocityLaw.linear()
    f = build_flux(v)
    if d0 == 0.0:
        return f, build_diffusivity("NelsonDeltaTau", v, delta=2.0, tau=1.0)
    return f, DiffusivityModel.polynomial([d0, 2.0, -1.0])


@pytest.fixture(scope="session")
def cubic_spec():
    f, D = cubic_models()
    lm, lp = cubic_end_states(ALPHA, MU)
    return check_existence_D1(f, sign_pattern(D), lm, lp)


@pytest.fixture(scope="session")
def cubic_profile(cubic_spec):
    return xi_of_phi(cubic_spec)


@pytest.fixture(scope="session")
def d2_spec():
    f, D = d2_models()
    return check_existence_D2(f, sign_pattern(D), 0.1, 0.9)


@pytest.fixture(scope="session")
def a1_spec():
    f, D = a1_models()
    return constant_sign_case(f, D, 0.0, 0.6)


@pytest.fixture(scope="session")
def a1_spec_positive():
    f, D = a1_models(0.1)
    return constant_sign_case(f, D, 0.0, 0.6)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
