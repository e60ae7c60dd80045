"""One test per acceptance criterion; each prints a PASS/FAIL line.

Independent oracles: the cubic closed form for end states, the DOPRI5
shooting integrator for profiles, a bounded scalar minimizer for the
cubic-law admissibility grid.
"""
import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from fbwave import (
    QuadratureDivergence,
    VelocityLaw,
    build_diffusivity,
    build_family,
    build_flux,
    check_existence_D1,
    convergence_check,
    cubic_end_states,
    end_state_for,
    end_states_general,
    insert_plateau,
    mu_from_rho,
    mu_window,
    ode_oracle,
    ordering_check,
    rankine_hugoniot_check,
    sign_pattern,
    constant_sign_case,
    xi_of_phi,
)
from fbwave.existence import cubic_velocity, critical_density_beta, critical_density_h, cubic_law_admissible
from fbwave.models import DiffusivityModel, FluxModel
from fbwave.viscosity import rescaling_deviation

from conftest import ACCEPTANCE, ALPHA, MU

CUBIC = FluxModel.polynomial([0.0, 1.0, -2.0, 1.0])
MU_FIG5 = -0.2538222222222222222  # 40-digit mpmath


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


@pytest.fixture(autouse=True)
def _mark_incomplete(request):
    n = getattr(request.function, "criterion", None)
    if n is not None:
        ACCEPTANCE[n] = (False, "did not complete")
    yield


def criterion(n):
    def deco(fn):
        fn.criterion = n
        return fn
    return deco


@criterion(1)
def test_criterion_01_cubic_traffic_end_states():
    alpha, lp = 88 / 150, 147 / 150
    t = time.perf_counter()
    es = end_state_for(CUBIC, alpha, l_plus=lp)
    dt = time.perf_counter() - t
    mu = mu_from_rho(alpha, lp)
    rm, rp = cubic_end_states(alpha, mu)
    # exact mu is -0.25382222...; the quoted -0.2539 holds only to about 1e-4
    ok = (abs(150 * es.l_minus - 65) <= 0.5 and abs(mu - MU_FIG5) < 1e-12 and abs(mu + 0.2539) < 1e-4
          and abs(rm - ((2 - alpha) - rp)) < 1e-12 and abs(rm - es.l_minus) < 1e-9 and dt < 1.0)
    record(1, ok, f"l_minus={150 * es.l_minus:.4f}/150 (target 65 +- 0.5), mu={mu:.6f}, "
                  f"closed form {150 * rm:.4f}/150, {dt * 1e3:.0f} ms")


@criterion(2)
def test_criterion_02_exponential_traffic_end_states():
    f = build_flux(VelocityLaw.exponential(1.0))
    t = time.perf_counter()
    es = end_state_for(f, 89 / 150, l_plus=147 / 150)
    dt = time.perf_counter() - t
    ok = abs(150 * es.l_minus - 61) <= 2 and dt < 1.0
    record(2, ok, f"l_minus={150 * es.l_minus:.4f}/150 (target 61 +- 2), {dt * 1e3:.0f} ms")


@criterion(3)
def test_criterion_03_mu_window():
    w = mu_window(0.75)
    ok = abs(w.lo + 0.3125) <= 1e-12 and abs(w.hi + 0.1875) <= 1e-12 and mu_window(0.5).empty
    record(3, ok, f"window(0.75)=({w.lo!r}, {w.hi!r}), window(0.5) empty={mu_window(0.5).empty}")


@criterion(4)
def test_criterion_04_round_trip():
    w = mu_window(0.75)
    mus = w.lo + (np.arange(50) + 0.5) / 50 * (w.hi - w.lo)
    rt = gen = 0.0
    for mu in mus:
        rm, rp = cubic_end_states(0.75, mu)
        rt = max(rt, abs(mu_from_rho(0.75, rp) - mu))
        es = end_state_for(CUBIC, 0.75, m=mu)
        gen = max(gen, abs(es.l_minus - rm), abs(es.l_plus - rp))
    record(4, rt <= 1e-12 and gen <= 1e-8,
           f"round-trip max err {rt:.2e} (<=1e-12), general vs closed form {gen:.2e} (<=1e-8)")


def _accepted_specs():
    f, D = CUBIC, build_diffusivity("HvSquared", VelocityLaw.quadratic(), sigma=0.25 ** 3 / 0.75)
    pat = sign_pattern(D)
    specs = [check_existence_D1(f, pat, *cubic_end_states(ALPHA, MU))]
    for es in end_states_general(f, ALPHA, m_range=(-0.3125, -0.1875), n_samples=50).members:
        specs.append(check_existence_D1(f, ALPHA, es.l_minus, es.l_plus))
    es5 = end_state_for(CUBIC, 88 / 150, l_plus=147 / 150)
    specs.append(check_existence_D1(CUBIC, 88 / 150, es5.l_minus, es5.l_plus))
    f6 = build_flux(VelocityLaw.exponential(1.0))
    es6 = end_state_for(f6, 89 / 150, l_plus=147 / 150)
    specs.append(check_existence_D1(f6, 89 / 150, es6.l_minus, es6.l_plus))
    return specs


@criterion(5)
def test_criterion_05_collinearity():
    specs = _accepted_specs()
    res = max(s.residual for s in specs)
    fz = max(float(np.max(np.abs(s.F([s.l_minus, s.alpha, s.l_plus])))) for s in specs)
    record(5, res < 1e-10 and fz < 1e-10,
           f"{len(specs)} specs: max secant residual {res:.2e}, max |F| at nodes {fz:.2e} (<1e-10)")


@criterion(6)
def test_criterion_06_oracle_equivalence(cubic_spec):
    t = time.perf_counter()
    prof = xi_of_phi(cubic_spec)
    ode = ode_oracle(cubic_spec)
    dev = ode.deviation(prof)
    dt = time.perf_counter() - t
    record(6, dev < 1e-6 and dt < 5.0,
           f"sup |xi_ode - xi_quad| = {dev:.2e} over {ode.xi.size} samples (<1e-6), {dt:.2f} s")


@criterion(7)
def test_criterion_07_slope_law(cubic_spec):
    prof = xi_of_phi(cubic_spec)
    s = cubic_spec
    expected = (float(s.flux.deriv(ALPHA)) - s.c) / float(s.diffusivity.deriv(ALPHA))
    errs = [abs(prof.divided_slope(h) / expected - 1) for h in (1e-2, 1e-3, 1e-4, 1e-5)]
    ok = errs[-1] < 1e-4 and all(b < a for a, b in zip(errs, errs[1:]))
    record(7, ok, f"(f'(a)-c)/D'(a) = {expected:.12g}; relative errors under refinement "
                  + ", ".join(f"{e:.1e}" for e in errs))


@criterion(8)
def test_criterion_08_sharpness(a1_spec, a1_spec_positive):
    p0 = xi_of_phi(a1_spec)
    xa = p0.contact("left")
    flux = p0.contact_flux("left")
    sharp_ok = p0.sharp_left and math.isfinite(xa) and flux[-1] < 1e-6 and flux[-1] < flux[0]

    p1 = xi_of_phi(a1_spec_positive)
    tail = p1.left_tail
    seg = p1.segments[0]
    xi_last = abs(seg.I[-1])
    # asymptotic tail: eta decays like exp(-rate |xi|); extend in log space to the horizon
    log_eta = math.log(tail.eta_last) - tail.rate * (1e6 - xi_last)
    f, D = a1_spec_positive.flux, a1_spec_positive.diffusivity
    rate_pred = (float(f.deriv(0.0)) - a1_spec_positive.c) / float(D.eval(0.0))
    try:
        seg.exact_I(a1_spec_positive.l_minus)
        unbounded = False
    except QuadratureDivergence:
        unbounded = True
    asym_ok = (not p1.sharp_left and unbounded and log_eta < math.log(1e-9)
               and abs(tail.rate / rate_pred - 1) < 1e-2)
    record(8, sharp_ok and asym_ok,
           f"D(0)=0: contact at xi_a={xa:.6g}, |D phi'| -> {flux[-1]:.1e}; "
           f"D(0)=0.1: rate {tail.rate:.4f} (F'/D = {rate_pred:.4f}), "
           f"log10(phi - l_minus) at xi=-1e6 ~ {log_eta / math.log(10):.3g}")


@criterion(9)
def test_criterion_09_viscosity(cubic_spec):
    eps = (1.0, 0.5, 0.1, 0.01, 0.001)
    fam = build_family(cubic_spec, eps, resolve=(0.1, 0.01))
    xi = np.linspace(-0.5, 0.5, 101)
    resc = max(rescaling_deviation(fam.profiles[e], fam.base, e, xi) for e in eps[1:])
    direct = max(fam.spot_checks.values())
    ordering = ordering_check(build_family(fam.base, eps[:4]))
    conv = convergence_check(fam, delta=0.1, conv_tol=1e-3)
    rh = rankine_hugoniot_check(fam.limit, cubic_spec.flux).max_residual
    plat = build_family(insert_plateau(fam.base, 2.0), eps)
    rh_plat = rankine_hugoniot_check(plat.limit, cubic_spec.flux).max_residual
    ok = (resc < 1e-10 and direct < 1e-10 and ordering.passed and conv.monotone
          and conv.d[-1] < 1e-3 and rh < 1e-10 and rh_plat < 1e-10)
    record(9, ok, f"rescaling {resc:.1e} (direct eps*D solve {direct:.1e}), ordering "
                  f"{'ok' if ordering.passed else 'violated'}, d(eps)="
                  + ",".join(f"{d:.1e}" for d in conv.d)
                  + f", RH {rh:.1e}, plateau RH {rh_plat:.1e}")


def _grid_min(alpha, beta):
    """Global min of the integrated cubic law on [0, 1], by grid then bounded refinement."""
    law = cubic_velocity(alpha, beta)
    x = np.linspace(0.0, 1.0, 4001)
    y = law.eval(x)
    k = int(np.argmin(y))
    lo, hi = x[max(k - 1, 0)], x[min(k + 1, x.size - 1)]
    r = minimize_scalar(lambda t: float(law.eval(t)), bounds=(lo, hi), method="bounded",
                        options={"xatol": 1e-12})
    return min(float(y[k]), float(r.fun))


@criterion(10)
def test_criterion_10_admissibility_grid():
    g = (np.arange(50) + 1 / 3) / 50
    cells = mismatches = 0
    for a in g:
        for b in g:
            if not a < b:
                continue
            cells += 1
            formula = cubic_law_admissible(a, b).admissible
            direct = _grid_min(a, b) >= -1e-9
            mismatches += formula != direct
    record(10, mismatches == 0, f"{cells} cells with alpha < beta, {mismatches} mismatches")


@criterion(11)
def test_criterion_11_critical_density():
    r = critical_density_beta(0.5, 3.0, 1.0)
    h, dh = critical_density_h(0.5, 3.0, 1.0)
    ok = abs(float(h(r.beta))) < 1e-10 and float(dh(r.beta)) > 0
    try:
        critical_density_beta(0.5, 2.0, 1.0)
        refused = None
    except Exception as exc:  # noqa: BLE001
        refused = getattr(exc, "failed", None)
    ok = ok and refused == ["gamma >= (1+a)/a"]
    record(11, ok, f"beta={r.beta:.15f}, |h(beta)|={abs(r.h_beta):.1e}, h'(beta)={r.dh_beta:.4f}; "
                   f"gamma=2 refused on {refused}")


@criterion(12)
def test_criterion_12_case_matrix():
    lin = VelocityLaw.linear()
    log = VelocityLaw.log_law(2.0)
    convex = FluxModel.polynomial([0.0, 0.0, 1.0])
    cases = [
        ("a1", build_flux(lin), build_diffusivity("NelsonDeltaTau", lin, delta=2.0, tau=1.0), 0.0, 1.0),
        ("a2", convex, DiffusivityModel.polynomial([1.0]), 0.1, 0.9),
        ("b1", build_flux(log), build_diffusivity("NelsonDeltaTau", log, delta=1.0, tau=1.0),
         math.exp(-0.5), 1.0),
        ("b2", convex, DiffusivityModel.polynomial([-1.0]), 0.1, 0.9),
    ]
    got, worst = [], 0.0
    for want, f, D, a, b in cases:
        s = constant_sign_case(f, D, a, b)
        got.append(s.case if s else None)
        worst = max(worst, abs(s.c - (float(f.eval(b)) - float(f.eval(a))) / (b - a)))
    ok = got == [c[0] for c in cases] and worst <= 1e-12
    record(12, ok, f"cases {got}, max speed error {worst:.1e}")
