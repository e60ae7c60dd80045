import math

import numpy as np
import pytest

from fbwave import (
    DimensionalFrame,
    NonPositiveParam,
    VelocityLaw,
    build_diffusivity,
    build_flux,
    calibrate_tau,
    inflection_points,
    sign_pattern,
    validate_derivatives,
)
from fbwave.models import DiffusivityModel, FluxModel, diffusivity_from_dict

# alpha solving (1 - alpha)^3 = alpha, 200 bisection steps at 40 digits (mpmath)
ALPHA_SIGMA1 = 0.3176721961719806726

PACKAGED = [
    VelocityLaw.linear(),
    VelocityLaw.quadratic(vbar=1.3),
    VelocityLaw.power_pq(0.7, 2.5),
    VelocityLaw.power_pq(2.0, 1.5),
    VelocityLaw.kladek(1.913),
    VelocityLaw.exponential(1.0),
    VelocityLaw.exponential(3.0, a=0.5),
    VelocityLaw.log_law(2.0),
]


@pytest.mark.parametrize("v", PACKAGED, ids=lambda v: f"{v.kind.value}")
def test_packaged_laws_vanish_at_one_and_stay_nonnegative(v):
    assert v.eval(1.0) == 0.0
    grid = np.linspace(0.0, 1.0, 10_001)[:-1]
    assert np.min(v.eval(grid)) >= -1e-12


@pytest.mark.parametrize("v", PACKAGED, ids=lambda v: f"{v.kind.value}")
def test_analytic_derivatives_match_finite_differences(v):
    assert validate_derivatives(v).passed


def test_exponential_kink_flag_set_exactly_when_a_positive():
    assert VelocityLaw.exponential(2.0, a=0.0).non_c1 == ()
    assert VelocityLaw.exponential(2.0, a=0.3).non_c1 == (0.3,)


def test_log_law_kink_excluded_from_derivative_check():
    v = VelocityLaw.log_law(2.0)
    rep = validate_derivatives(v)
    assert rep.passed
    assert rep.excluded == (pytest.approx(math.exp(-0.5)),)


def test_wrong_custom_derivative_fails_validation():
    v = VelocityLaw.custom(lambda r: 1.0 - r, lambda r: -2.0 + 0.0 * r)
    assert not validate_derivatives(v).passed


def test_flux_is_rho_times_v():
    v = VelocityLaw.kladek(1.913)
    f = build_flux(v)
    r = np.linspace(0.0, 1.0, 1001)
    assert f.eval(0.0) == 0.0
    np.testing.assert_allclose(f.eval(r), r * v.eval(r), atol=1e-14, rtol=0)
    np.testing.assert_allclose(f.deriv(r), v.eval(r) + r * v.deriv(r), atol=1e-14, rtol=0)


def test_quadratic_flux_inflection_at_two_thirds_and_100_cars():
    f = build_flux(VelocityLaw.quadratic())
    (x,) = inflection_points(f)
    assert x == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert DimensionalFrame(150.0).to_dimensional(x) == pytest.approx(100.0, abs=1e-9)


def test_nelson_with_linear_law_closed_form():
    D = build_diffusivity("NelsonDeltaTau", VelocityLaw.linear(), delta=0.7, tau=0.4)
    r = np.linspace(0, 1, 101)
    np.testing.assert_allclose(D.eval(r), r * (0.7 - 0.4 * r), atol=1e-15)
    np.testing.assert_allclose(D.deriv(r), 0.7 - 0.8 * r, atol=1e-15)


@pytest.mark.parametrize("kind,params", [
    ("NelsonDeltaTau", {"delta": 0.3, "tau": 0.2}),
    ("DeltaOnly", {"delta": 0.3}),
    ("HvSquared", {"h": 0.8, "tau": 0.2}),
    ("Hv", {"h": 0.8, "tau": 0.2}),
    ("KineticTwoSpeed", {"tau": 0.5}),
])
def test_diffusivity_formulas(kind, params):
    v = VelocityLaw.exponential(1.5, vbar=1.2)
    D = build_diffusivity(kind, v, **params)
    r = np.linspace(0.01, 0.99, 197)
    g = r * v.deriv(r)
    vv = v.eval(r)
    expected = {
        "NelsonDeltaTau": lambda: -g * (params.get("delta", 0) + params["tau"] * g),
        "DeltaOnly": lambda: -params["delta"] * g,
        "HvSquared": lambda: -g * (params.get("h", 0) * vv**2 + params["tau"] * g),
        "Hv": lambda: -g * (params.get("h", 0) * vv + params["tau"] * g),
        "KineticTwoSpeed": lambda: params["tau"] * (g + vv) * (1.2 - g - vv),
    }[kind]()
    np.testing.assert_allclose(D.eval(r), expected, rtol=1e-13, atol=1e-15)
    assert validate_derivatives(D).passed


def test_hv_squared_vanishes_at_one():
    D = build_diffusivity("HvSquared", VelocityLaw.quadratic(), h=1.0, tau=0.3)
    assert D.eval(1.0) == 0.0


def test_hv_squared_quadratic_closed_form_and_sign():
    sigma, vbar, h = 0.4, 1.5, 0.8
    v = VelocityLaw.quadratic(vbar=vbar)
    D = build_diffusivity("HvSquared", v, sigma=sigma, h=h)
    r = np.linspace(0.0, 1.0, 2001)
    closed = 2 * h * vbar**3 * r * (1 - r) ** 2 * ((1 - r) ** 3 - sigma * r)
    np.testing.assert_allclose(D.eval(r), closed, atol=1e-14)
    inner = r[1:-1]
    np.testing.assert_array_equal(np.sign(D.eval(inner)), np.sign((1 - inner) ** 3 - sigma * inner))


def test_sigma_one_puts_zero_at_bisection_value():
    D = build_diffusivity("HvSquared", VelocityLaw.quadratic(), sigma=1.0)
    pat = sign_pattern(D)
    assert pat.alpha == pytest.approx(ALPHA_SIGMA1, abs=1e-12)


@pytest.mark.parametrize("kind,params", [
    ("NelsonDeltaTau", {"delta": 0.0, "tau": 1.0}),
    ("NelsonDeltaTau", {"delta": 1.0, "tau": -1.0}),
    ("DeltaOnly", {"delta": -0.1}),
    ("HvSquared", {"h": 0.0, "tau": 1.0}),
    ("Hv", {"h": 1.0, "tau": -0.5}),
    ("KineticTwoSpeed", {"tau": 0.0}),
])
def test_nonpositive_parameters_rejected(kind, params):
    with pytest.raises(NonPositiveParam):
        build_diffusivity(kind, VelocityLaw.linear(), **params)


def test_nonpositive_sigma_rejected():
    with pytest.raises(NonPositiveParam):
        build_diffusivity("HvSquared", VelocityLaw.quadratic(), sigma=0.0)


def test_safety_velocity_reported():
    v = VelocityLaw.linear(vbar=2.0)
    ok = build_diffusivity("NelsonDeltaTau", v, delta=3.0, tau=1.0)
    bad = build_diffusivity("NelsonDeltaTau", v, delta=1.0, tau=1.0)
    assert ok.safety_velocity() == 3.0 and ok.safety_velocity_ok() is True
    assert bad.safety_velocity_ok() is False
    assert build_diffusivity("DeltaOnly", v, delta=1.0).safety_velocity_ok() is None


@pytest.mark.parametrize("kind", ["NelsonDeltaTau", "HvSquared", "Hv"])
def test_calibrated_tau_places_the_zero(kind):
    v = VelocityLaw.exponential(1.0)
    params = {"delta": 0.5} if kind == "NelsonDeltaTau" else {"h": 1.0}
    tau = calibrate_tau(kind, v, 0.6, **params)
    D = build_diffusivity(kind, v, tau=tau, **params)
    assert abs(D.eval(0.6)) < 1e-15
    assert sign_pattern(D).alpha == pytest.approx(0.6, abs=1e-12)


def test_scaled_diffusivity():
    D = build_diffusivity("Hv", VelocityLaw.linear(), h=1.0, tau=0.7)
    r = np.linspace(0, 1, 11)
    np.testing.assert_allclose(D.scaled(0.01).eval(r), 0.01 * D.eval(r), rtol=1e-15)
    with pytest.raises(NonPositiveParam):
        D.scaled(0.0)


def test_descriptor_round_trip():
    v = VelocityLaw.exponential(1.788, vbar=1.7)
    assert VelocityLaw.from_dict(v.to_dict()).param_dict == v.param_dict
    D = diffusivity_from_dict({"kind": "Hv", "h": 1.5, "tau": 0.5}, v)
    assert D.to_dict() == {"kind": "Hv", "h": 1.5, "tau": 0.5}
    P = diffusivity_from_dict({"kind": "Direct", "poly": [0.18, -0.9, 1.0]}, None)
    assert P.eval(0.3) == pytest.approx(0.0, abs=1e-15)


def test_polynomial_models():
    f = FluxModel.polynomial([0.0, 1.0, -1.0])
    assert f.eval(0.5) == 0.25 and f.deriv(0.5) == 0.0
    D = DiffusivityModel.polynomial([0.1, 2.0, -1.0])
    assert D.deriv(1.0) == 0.0


def test_frame_round_trip():
    fr = DimensionalFrame(150.0, 120.0, "cars/km", "km/h")
    x = np.linspace(0, 1, 1001)
    np.testing.assert_allclose(fr.to_normalized(fr.to_dimensional(x)), x, atol=1e-14, rtol=0)
    np.testing.assert_allclose(fr.speed_to_normalized(fr.speed_to_dimensional(x)), x, atol=1e-14, rtol=0)
    assert fr.flux_to_dimensional(0.25) == pytest.approx(0.25 * 150 * 120)
    with pytest.raises(NonPositiveParam):
        DimensionalFrame(0.0)
