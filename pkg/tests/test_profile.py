import math
import time

import numpy as np
import pytest

from fbwave import (
    NegativeXi1,
    QuadratureDivergence,
    check_existence_reversed,
    decreasing_front,
    end_states_general,
    insert_plateau,
    ode_oracle,
    profile_D2,
    sign_pattern,
    xi_of_phi,
)
from fbwave.existence import critical_density_models
from fbwave.profile import reverse_check

from conftest import ALPHA

# xi(phi) for the cubic benchmark anchored at alpha = 0.75, 30-digit mpmath quadrature of D/F
XI_ORACLE = {
    0.4: -0.5368277663992172615,
    0.5: -0.2061895096323990939,
    0.6: -0.07995895399684113419,
    0.7: -0.01841811184245203457,
    0.8: 0.01349410847968053187,
    0.85: 0.02406597790875330330,
    0.9: 0.03823121694438763845,
}


def test_cubic_profile_matches_frozen_values(cubic_profile):
    for phi, xi in XI_ORACLE.items():
        assert cubic_profile.xi_at(phi) == pytest.approx(xi, abs=1e-13)


def test_cubic_profile_is_monotone(cubic_profile):
    xi, phi, dphi = cubic_profile.samples()
    assert np.all(np.diff(xi) > 0)
    assert np.all(np.diff(phi) > 0)
    inside = np.isfinite(dphi)
    assert np.all(dphi[inside] > 0)


def test_cubic_tails_asymptotic(cubic_profile):
    p = cubic_profile
    assert not p.sharp_left and not p.sharp_right
    assert p.left_tail.d_end > 0 and p.right_tail.d_end < 0
    assert p.xi_a is None and p.xi_b is None
    with pytest.raises(QuadratureDivergence):
        p.contact("left")
    lo, hi = p.phi[0], p.phi[-1]
    assert lo - p.spec.l_minus <= 1.01e-8 and p.spec.l_plus - hi <= 1.01e-8


def test_phi_at_inverts_xi_at(cubic_profile):
    for phi in XI_ORACLE:
        assert cubic_profile.phi_at(cubic_profile.xi_at(phi)) == pytest.approx(phi, abs=1e-13)
    assert cubic_profile.phi_at(0.0) == pytest.approx(ALPHA, abs=1e-15)


def test_ode_oracle_agrees(cubic_spec, cubic_profile):
    t = time.perf_counter()
    ode = ode_oracle(cubic_spec)
    dev = ode.deviation(cubic_profile)
    assert time.perf_counter() - t < 5.0
    assert dev < 1e-6


def test_reverse_integration_agrees(cubic_spec, cubic_profile):
    assert reverse_check(cubic_spec, cubic_profile) < 1e-8


def test_slope_law_at_alpha(cubic_profile):
    assert cubic_profile.slope_kind == "finite"
    assert cubic_profile.slope_at_alpha == pytest.approx(3.2, rel=1e-12)
    ds = [cubic_profile.divided_slope(h) for h in (1e-3, 1e-4, 1e-5)]
    errs = [abs(d / 3.2 - 1) for d in ds]
    assert errs[-1] < 1e-4
    assert errs[2] < errs[1] < errs[0]


def test_phi_grid_beyond_horizon_refused(cubic_spec):
    with pytest.raises(QuadratureDivergence):
        xi_of_phi(cubic_spec, phi_grid=[cubic_spec.l_minus])


def test_sharp_left_contact_a1(a1_spec):
    p = xi_of_phi(a1_spec)
    assert a1_spec.case == "a1"
    assert p.sharp_left and p.left_tail.d_end == 0.0
    xa = p.contact("left")
    assert math.isfinite(xa) and xa < 0
    assert p.phi_at(xa - 1.0) == 0.0
    flux = p.contact_flux("left")
    assert flux[-1] < 1e-6 and flux[-1] < flux[0]
    # right end has D(0.6) > 0 and is approached asymptotically
    assert not p.sharp_right


def test_positive_d_at_end_is_asymptotic(a1_spec_positive):
    p = xi_of_phi(a1_spec_positive)
    assert not p.sharp_left
    assert p.left_tail.d_end == pytest.approx(0.1)
    # exponential rate near l_minus is F'(0)/D(0)
    assert p.left_tail.rate == pytest.approx(6.0, rel=1e-3)


def test_plateau_insertion(cubic_profile):
    p = insert_plateau(cubic_profile, 2.0)
    assert p.xi1 == 2.0
    assert p.phi_at(1.0) == ALPHA
    assert p.xi_at(0.8) == pytest.approx(2.0 + XI_ORACLE[0.8], abs=1e-13)
    assert p.xi_at(0.5) == pytest.approx(XI_ORACLE[0.5], abs=1e-13)
    assert not p.c1_at_junctions
    assert p.junction_flux_residual() < 1e-10
    assert insert_plateau(cubic_profile, 0.0) is cubic_profile
    with pytest.raises(NegativeXi1):
        insert_plateau(cubic_profile, -1.0)


def test_d2_profile(d2_spec):
    p = profile_D2(d2_spec, xi1=1.0)
    assert p.xi1 == 1.0
    assert p.xi2 > p.xi1 and p.xi3 == p.xi2
    assert p.phi_at(0.5) == pytest.approx(0.3, abs=1e-15)
    assert p.phi_at(p.xi2) == pytest.approx(0.6, abs=1e-12)
    xi, phi, _ = p.samples()
    assert np.all(np.diff(xi) >= 0) and np.all(np.diff(phi) >= 0)


def test_d2_explicit_plateaus(d2_spec):
    base = profile_D2(d2_spec)
    span = base.xi2
    p = profile_D2(d2_spec, xi1=1.0, xi2=1.0 + span, xi3=3.0 + span)
    assert p.xi3 - p.xi2 == pytest.approx(2.0)
    assert p.phi_at(2.0 + span) == d2_spec.beta
    with pytest.raises(ValueError):
        profile_D2(d2_spec, xi1=1.0, xi2=1.0 + span + 1e-3)


def test_decreasing_front():
    f, D = critical_density_models(0.4, 3.5, 0.45)
    pat = sign_pattern(D)
    es = end_states_general(f, pat.beta, n_samples=40).members[0]
    spec = check_existence_reversed(f, pat, es.l_minus, es.l_plus)
    p = decreasing_front(spec)
    xi, phi, _ = p.samples()
    assert np.all(np.diff(xi) > 0)
    assert np.all(np.diff(phi) < 0)
    assert phi[0] > phi[-1]
    assert p.phi_at(0.0) == pytest.approx(pat.beta, abs=1e-15)

