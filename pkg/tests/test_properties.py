import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fbwave import (
    OutsideWindow,
    check_existence_D1,
    chord_conditions,
    cubic_end_states,
    end_state_for,
    mu_from_rho,
    mu_window,
    sign_pattern,
    xi_of_phi,
)
from fbwave._kernels import KernelContext
from fbwave.models import DiffusivityModel, FluxModel

CUBIC_COEFFS = [0.0, 1.0, -2.0, 1.0]
CUBIC = FluxModel.polynomial(CUBIC_COEFFS)

alphas = st.floats(0.52, 0.98)
fractions = st.floats(0.02, 0.98)
# strict chord margins vanish at the window edges; keep accepted specs away from them
spec_alphas = st.floats(0.55, 0.95)
spec_fractions = st.floats(0.1, 0.9)


def _window_mu(alpha, t):
    w = mu_window(alpha)
    return w.lo + t * (w.hi - w.lo)


def _cubic_spec(alpha, t):
    mu = _window_mu(alpha, t)
    lm, lp = cubic_end_states(alpha, mu)
    # D = (alpha - rho)(1.5 - rho): one interior zero at alpha, D' < 0 there
    D = DiffusivityModel.polynomial([1.5 * alpha, -(1.5 + alpha), 1.0])
    return check_existence_D1(CUBIC, sign_pattern(D), lm, lp)


@given(roots=st.lists(st.floats(0.05, 0.95), min_size=1, max_size=3, unique=True),
       k=st.floats(1e-3, 1e3))
def test_sign_pattern_invariant_under_positive_scaling(roots, k):
    roots = sorted(roots)
    assume(min(np.diff(roots), default=1.0) > 1e-3)
    coeffs = np.polynomial.polynomial.polyfromroots(roots)
    p1 = sign_pattern(DiffusivityModel.polynomial(list(coeffs)))
    p2 = sign_pattern(DiffusivityModel.polynomial(list(k * coeffs)))
    assert p1.classification is p2.classification
    np.testing.assert_allclose(p1.crossing_roots, p2.crossing_roots, atol=1e-12)
    assert [s for *_, s in p1.intervals] == [s for *_, s in p2.intervals]


@given(alpha=alphas, t=fractions, a=st.floats(-1, 1), b=st.floats(-1, 1))
def test_chord_margins_invariant_under_affine_shift(alpha, t, a, b):
    lm, lp = cubic_end_states(alpha, _window_mu(alpha, t))
    shifted = FluxModel.polynomial([a, 1.0 + b, -2.0, 1.0])
    m1 = chord_conditions(CUBIC, lm, [alpha], lp, n=2000)
    m2 = chord_conditions(shifted, lm, [alpha], lp, n=2000)
    np.testing.assert_allclose(m1.margins, m2.margins, atol=1e-12)


@given(alpha=alphas, t=fractions)
def test_mu_round_trip(alpha, t):
    mu = _window_mu(alpha, t)
    lm, lp = cubic_end_states(alpha, mu)
    assert 0 < lm < alpha < lp < 1
    assert mu_from_rho(alpha, lp) == pytest.approx(mu, abs=1e-12)
    assert mu_from_rho(alpha, lm) == pytest.approx(mu, abs=1e-12)


@given(alpha=st.floats(0.01, 0.5), mu=st.floats(-2.0, 2.0))
def test_no_window_below_one_half(alpha, mu):
    assert mu_window(alpha).empty
    with pytest.raises(OutsideWindow):
        cubic_end_states(alpha, mu)


@settings(max_examples=25)
@given(alpha=alphas, t=fractions)
def test_general_solver_matches_closed_form(alpha, t):
    mu = _window_mu(alpha, t)
    lm, lp = cubic_end_states(alpha, mu)
    es = end_state_for(CUBIC, alpha, m=mu, chord_n=2000)
    assert es.l_minus == pytest.approx(lm, abs=1e-8)
    assert es.l_plus == pytest.approx(lp, abs=1e-8)


@settings(max_examples=25)
@given(alpha=spec_alphas, t=spec_fractions)
def test_accepted_spec_invariants(alpha, t):
    s = _cubic_spec(alpha, t)
    assert s.residual < 1e-10
    assert np.max(np.abs(s.F([s.l_minus, alpha, s.l_plus]))) < 1e-10
    assert float(s.flux.deriv(alpha)) <= s.c + 1e-9


@settings(max_examples=15)
@given(alpha=spec_alphas, t=spec_fractions)
def test_profile_monotone(alpha, t):
    p = xi_of_phi(_cubic_spec(alpha, t), n=100)
    xi, phi, dphi = p.samples()
    assert np.all(np.diff(xi) > 0)
    assert np.all(np.diff(phi) > 0)
    assert np.all(dphi[np.isfinite(dphi)] > 0)


@settings(max_examples=15)
@given(alpha=spec_alphas, t=spec_fractions, u=st.floats(0.05, 0.95), v=st.floats(0.05, 0.95))
def test_profile_differences_are_anchor_free(alpha, t, u, v):
    # xi(phi2) - xi(phi1) is the integral of D/F between them, whatever the anchor
    s = _cubic_spec(alpha, t)
    p = xi_of_phi(s, n=100)
    lo, hi = (s.l_minus, alpha) if u < 0.5 else (alpha, s.l_plus)
    p1, p2 = sorted((lo + u * (hi - lo), lo + v * (hi - lo)))
    assume(p2 - p1 > 1e-6)
    ctx = KernelContext(s.flux, s.diffusivity, s.c, (s.l_minus, alpha, s.l_plus))
    direct = float(ctx.gk_integrate(np.array([p1]), np.array([p2]))[0][0])
    assert p.xi_at(p2) - p.xi_at(p1) == pytest.approx(direct, rel=1e-9, abs=1e-12)


@settings(max_examples=15)
@given(alpha=spec_alphas, t=spec_fractions, eps=st.floats(1e-3, 1.0), x=st.floats(-2.0, 2.0))
def test_rescaling_is_exact(alpha, t, eps, x):
    p = xi_of_phi(_cubic_spec(alpha, t), n=100)
    assert p.rescaled(eps).phi_at(eps * x) == pytest.approx(p.phi_at(x), abs=1e-12)
