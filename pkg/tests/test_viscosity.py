import numpy as np
import pytest

from fbwave import (
    OrderingViolated,
    SlopeAssumptionViolated,
    build_family,
    check_existence_D1,
    convergence_check,
    cubic_end_states,
    insert_plateau,
    ordering_check,
    rankine_hugoniot_check,
    xi_of_phi,
)
from fbwave.models import DiffusivityModel, FluxModel
from fbwave.viscosity import limit_of, rescaling_deviation, sup_distance

from conftest import ALPHA, MU

EPS = (1.0, 0.5, 0.1, 0.01, 0.001)


@pytest.fixture(scope="module")
def family(cubic_profile):
    return build_family(cubic_profile, EPS)


def test_rescaling_identity(family):
    xi = np.linspace(-0.05, 0.05, 41)
    for e in EPS[1:]:
        assert rescaling_deviation(family.profiles[e], family.base, e, xi) < 1e-10


def test_rescaled_profile_matches_direct_solve(cubic_spec):
    fam = build_family(cubic_spec, (1.0, 0.1, 0.01), resolve=(0.1, 0.01))
    assert max(fam.spot_checks.values()) < 1e-10


def test_ordering_on_negative_axis(family):
    rep = ordering_check(family)
    assert rep.passed, rep.to_dict()
    assert rep.allowed_ties == 0


def test_ordering_violation_raises(family):
    # swapping two members flips the inequality
    fake = type(family)(family.eps_list, family.base,
                        {**family.profiles, 0.5: family.profiles[0.01], 0.01: family.profiles[0.5]},
                        family.limit)
    with pytest.raises(OrderingViolated):
        ordering_check(fake, raise_on_violation=True)


def test_convergence(family):
    rep = convergence_check(family, delta=0.1, conv_tol=1e-3)
    assert rep.monotone
    assert rep.d[-1] < 1e-3
    assert rep.passed


def test_limit_is_the_step(family):
    lim = family.limit
    assert lim.levels == (family.spec.l_minus, family.spec.l_plus)
    assert lim.jumps == (0.0,)
    assert lim(-1.0) == family.spec.l_minus and lim(1.0) == family.spec.l_plus


def test_rankine_hugoniot(family, cubic_spec):
    rep = rankine_hugoniot_check(family.limit, cubic_spec.flux)
    assert rep.max_residual < 1e-10
    bad = rankine_hugoniot_check(family.limit, cubic_spec.flux, l_plus=cubic_spec.l_plus - 1e-3)
    assert bad.total > 1e-6


def test_plateau_limit_keeps_two_jumps(cubic_profile, cubic_spec):
    fam = build_family(insert_plateau(cubic_profile, 2.0), EPS)
    lim = fam.limit
    assert lim.levels == (cubic_spec.l_minus, ALPHA, cubic_spec.l_plus)
    assert lim.jumps == (0.0, 2.0)
    rep = rankine_hugoniot_check(lim, cubic_spec.flux)
    assert rep.max_residual < 1e-10 and len(rep.sub_jumps) == 2
    assert fam.profiles[0.001].phi_at(1.0) == ALPHA
    assert sup_distance(fam.profiles[0.001], lim, 0.1) < 1e-3


def test_degenerate_slope_refused():
    f = FluxModel.polynomial([0.0, 1.0, -2.0, 1.0])
    D = DiffusivityModel.polynomial([0.421875, -1.6875, 2.25, -1.0])  # (0.75 - rho)^3
    lm, lp = cubic_end_states(ALPHA, MU)
    spec = check_existence_D1(f, ALPHA, lm, lp, D=D)
    assert xi_of_phi(spec).slope_kind == "infinite"
    with pytest.raises(SlopeAssumptionViolated):
        build_family(spec)


def test_sharp_left_ties_allowed(a1_spec):
    fam = build_family(xi_of_phi(a1_spec), EPS)
    rep = ordering_check(fam)
    assert rep.passed
    assert rep.allowed_ties > 0


def test_bad_eps_lists(cubic_profile):
    with pytest.raises(ValueError):
        build_family(cubic_profile, (0.1, 1.0))
    with pytest.raises(ValueError):
        build_family(cubic_profile, (1.0, 0.0))


def test_limit_of_reports_speed(cubic_profile):
    assert limit_of(cubic_profile).c == pytest.approx(MU, abs=1e-12)
