"""Traveling wavefronts of rho_t + f(rho)_x = (D(rho) rho_x)_x with sign-changing D."""
__version__ = "0.1.0"

from fbwave._kernels import BACKEND
from fbwave.errors import *  # noqa: F401,F403
from fbwave.errors import __all__ as _error_names
from fbwave.existence import (
    EndState,
    EndStateFamily,
    MuWindow,
    Regime,
    WaveSpec,
    alpha_from_sigma,
    check_existence_D1,
    check_existence_D2,
    check_existence_reversed,
    cubic_end_states,
    end_state_for,
    end_states_D2,
    end_states_general,
    mu_from_rho,
    mu_window,
    sigma_from_alpha,
    constant_sign_case,
)
from fbwave.fluxgeom import (
    Chord,
    ChordMargins,
    PatternKind,
    SignPattern,
    chord_conditions,
    classify_lax,
    inflection_points,
    secant,
    sign_pattern,
)
from fbwave.models import (
    DerivativeReport,
    DiffusivityKind,
    DiffusivityModel,
    DimensionalFrame,
    FluxModel,
    VelocityKind,
    VelocityLaw,
    build_diffusivity,
    build_flux,
    calibrate_tau,
    validate_derivatives,
)
from fbwave.profile import (
    Profile,
    decreasing_front,
    insert_plateau,
    ode_oracle,
    profile_D2,
    xi_of_phi,
)
from fbwave.viscosity import (
    StepLimit,
    ViscousFamily,
    build_family,
    convergence_check,
    ordering_check,
    rankine_hugoniot_check,
)

__all__ = [
    "BACKEND", "__version__",
    "DerivativeReport", "DiffusivityKind", "DiffusivityModel", "DimensionalFrame", "FluxModel",
    "VelocityKind", "VelocityLaw", "build_diffusivity", "build_flux", "calibrate_tau",
    "validate_derivatives",
    "Chord", "ChordMargins", "PatternKind", "SignPattern", "chord_conditions", "classify_lax",
    "inflection_points", "secant", "sign_pattern",
    "EndState", "EndStateFamily", "MuWindow", "Regime", "WaveSpec", "alpha_from_sigma",
    "check_existence_D1", "check_existence_D2", "check_existence_reversed", "cubic_end_states",
    "end_state_for", "end_states_D2", "end_states_general", "mu_from_rho", "mu_window",
    "sigma_from_alpha", "constant_sign_case",
    "Profile", "decreasing_front", "insert_plateau", "ode_oracle", "profile_D2", "xi_of_phi",
    "StepLimit", "ViscousFamily", "build_family", "convergence_check", "ordering_check",
    "rankine_hugoniot_check",
] + list(_error_names)
