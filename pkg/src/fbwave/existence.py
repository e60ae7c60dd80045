"""Existence checks for wavefronts, end-state families and closed-form checks."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from fbwave._parallel import pmap
from fbwave.errors import (
    BadOrdering,
    ChordFailed,
    CollinearityFailed,
    ConditionsNotMet,
    NonPositiveSigma,
    NotConstantSign,
    OutsideWindow,
)
from fbwave.fluxgeom import (
    ROOT_XTOL,
    Chord,
    ChordMargins,
    PatternKind,
    SignPattern,
    chord_conditions,
    secant,
    sign_pattern,
)
from fbwave.models import (
    DiffusivityKind,
    FluxModel,
    VelocityLaw,
    build_diffusivity,
    build_flux,
)

COLLINEAR_TOL = 1e-10


class Regime(str, enum.Enum):
    D1_FRONT = "D1Front"
    D2_FRONT = "D2Front"
    REVERSED_D1_FRONT = "ReversedD1Front"
    CONST_SIGN = "ConstSign"


@dataclass
class WaveSpec:
    """An accepted pair of end states with its speed and the zeros of ``D``.

    ``l_minus < l_plus`` always; ``increasing`` tells whether the profile
    goes from ``l_minus`` at minus infinity to ``l_plus`` (increasing) or
    the other way round.
    """

    l_minus: float
    l_plus: float
    c: float
    regime: Regime
    flux: FluxModel = field(repr=False)
    diffusivity: object = field(default=None, repr=False)
    pattern: Optional[SignPattern] = field(default=None, repr=False)
    zeros: Tuple[float, ...] = ()
    case: Optional[str] = None
    increasing: bool = True
    residual: float = 0.0
    margins: Optional[ChordMargins] = field(default=None, repr=False)

    @property
    def alpha(self) -> Optional[float]:
        if self.regime in (Regime.D1_FRONT, Regime.D2_FRONT):
            return self.zeros[0]
        return None

    @property
    def beta(self) -> Optional[float]:
        if self.regime is Regime.D2_FRONT:
            return self.zeros[1]
        if self.regime is Regime.REVERSED_D1_FRONT:
            return self.zeros[0]
        return None

    @property
    def stationary(self) -> bool:
        fm, fp = self.flux.eval(np.array([self.l_minus, self.l_plus]))
        return abs(fp - fm) <= COLLINEAR_TOL * max(1.0, abs(fm), abs(fp))

    def F(self, rho):
        """Chord residual ``f(rho) - f(l_minus) - c (rho - l_minus)``."""
        r = np.asarray(rho, dtype=float)
        return self.flux.eval(r) - float(self.flux.eval(self.l_minus)) - self.c * (r - self.l_minus)

    def to_dict(self) -> dict:
        out = {
            "regime": self.regime.value,
            "case": self.case,
            "l_minus": self.l_minus,
            "l_plus": self.l_plus,
            "c": self.c,
            "zeros": list(self.zeros),
            "increasing": self.increasing,
            "stationary": self.stationary,
            "collinearity_residual": self.residual,
        }
        if self.margins is not None:
            out["margins"] = [s.to_dict() for s in self.margins.segments]
        return out


def _zeros_of(pattern, kind, count):
    if isinstance(pattern, SignPattern):
        if pattern.classification is not kind:
            raise ValueError(f"sign pattern is {pattern.classification.value}, need {kind.value}")
        return tuple(pattern.crossing_roots[:count]), pattern.model
    vals = (pattern,) if np.isscalar(pattern) else tuple(pattern)
    if len(vals) != count:
        raise ValueError(f"need {count} zero(s) of D")
    return tuple(float(v) for v in vals), None


def _collinear(f, pts, c_ref=None):
    slopes = [secant(f, a, b) for a, b in zip(pts, pts[1:])]
    c = secant(f, pts[0], pts[-1]) if c_ref is None else c_ref
    res = max(abs(s - t) for s in slopes for t in slopes)
    return c, res, slopes


def check_existence_D1(f: FluxModel, pattern, l_minus: float, l_plus: float, *,
                       D=None, strict_tol: float = 1e-10, n: int = 20000) -> WaveSpec:
    """Accept ``(l_minus, l_plus)`` under a D1 pattern or raise with the violated condition.

    ``pattern`` is a :class:`SignPattern` classified as D1, or the zero
    ``alpha`` itself.
    """
    (alpha,), model = _zeros_of(pattern, PatternKind.D1, 1)
    D = D if D is not None else model
    lo, hi = f.domain
    if not (lo <= l_minus < alpha < l_plus <= hi):
        raise ValueError("need l_minus < alpha < l_plus inside the flux domain")
    c, res, slopes = _collinear(f, [l_minus, alpha, l_plus])
    if res > COLLINEAR_TOL * max(1.0, abs(c)):
        raise CollinearityFailed(
            f"secants through alpha differ: {slopes[0]:.12g} vs {slopes[1]:.12g}", res)
    margins = chord_conditions(f, l_minus, [alpha], l_plus, n=n, strict_tol=strict_tol)
    if not margins.holds:
        bad = margins.failing()[0]
        where = "(l_minus, alpha)" if bad.a == l_minus else "(alpha, l_plus)"
        raise ChordFailed(f"f not strictly {bad.side} the chord on {where}: margin {bad.margin:.3e}",
                          margins.margins, where)
    return WaveSpec(float(l_minus), float(l_plus), c, Regime.D1_FRONT, f, D,
                    pattern if isinstance(pattern, SignPattern) else None, (alpha,),
                    residual=res, margins=margins)


def check_existence_D2(f: FluxModel, pattern, l_minus: float, l_plus: float, *,
                       D=None, strict_tol: float = 1e-10, n: int = 20000) -> WaveSpec:
    """Accept ``(l_minus, l_plus)`` under a D2 pattern with zeros ``alpha < beta``."""
    (alpha, beta), model = _zeros_of(pattern, PatternKind.D2, 2)
    D = D if D is not None else model
    lo, hi = f.domain
    if not (lo <= l_minus < alpha < beta < l_plus <= hi):
        raise ValueError("need l_minus < alpha < beta < l_plus inside the flux domain")
    c, res, slopes = _collinear(f, [l_minus, alpha, beta, l_plus])
    if res > COLLINEAR_TOL * max(1.0, abs(c)):
        names = ["(l_minus, alpha)", "(alpha, beta)", "(beta, l_plus)"]
        worst = int(np.argmax([abs(s - c) for s in slopes]))
        raise CollinearityFailed(f"secant on {names[worst]} is {slopes[worst]:.12g}, "
                                 f"overall slope {c:.12g}", res)
    margins = chord_conditions(f, l_minus, [alpha, beta], l_plus, n=n, strict_tol=strict_tol)
    if not margins.holds:
        names = {l_minus: "(l_minus, alpha)", alpha: "(alpha, beta)", beta: "(beta, l_plus)"}
        bad = margins.failing()[0]
        raise ChordFailed(f"f not strictly {bad.side} the chord on {names[bad.a]}: "
                          f"margin {bad.margin:.3e}", margins.margins, names[bad.a])
    return WaveSpec(float(l_minus), float(l_plus), c, Regime.D2_FRONT, f, D,
                    pattern if isinstance(pattern, SignPattern) else None, (alpha, beta),
                    residual=res, margins=margins)


def check_existence_reversed(f: FluxModel, pattern, l_minus: float, l_plus: float, *,
                             D=None, strict_tol: float = 1e-10, n: int = 20000) -> WaveSpec:
    """Negative-then-positive ``D`` around ``beta``: a decreasing front.

    The chord geometry is the D1 one with ``beta`` in place of ``alpha``;
    the profile pastes the constant-sign cases b1 (on ``(l_minus, beta)``)
    and a2 (on ``(beta, l_plus)``).
    """
    (beta,), model = _zeros_of(pattern, PatternKind.REVERSED_D1, 1)
    D = D if D is not None else model
    lo, hi = f.domain
    if not (lo <= l_minus < beta < l_plus <= hi):
        raise ValueError("need l_minus < beta < l_plus inside the flux domain")
    c, res, slopes = _collinear(f, [l_minus, beta, l_plus])
    if res > COLLINEAR_TOL * max(1.0, abs(c)):
        raise CollinearityFailed(
            f"secants through beta differ: {slopes[0]:.12g} vs {slopes[1]:.12g}", res)
    margins = chord_conditions(f, l_minus, [beta], l_plus, n=n, strict_tol=strict_tol)
    if not margins.holds:
        bad = margins.failing()[0]
        where = "(l_minus, beta)" if bad.a == l_minus else "(beta, l_plus)"
        raise ChordFailed(f"f not strictly {bad.side} the chord on {where}: margin {bad.margin:.3e}",
                          margins.margins, where)
    return WaveSpec(float(l_minus), float(l_plus), c, Regime.REVERSED_D1_FRONT, f, D,
                    pattern if isinstance(pattern, SignPattern) else None, (beta,),
                    increasing=False, residual=res, margins=margins)


def constant_sign_case(f: FluxModel, D, a: float, b: float, *, n: int = 20000,
                       strict_tol: float = 1e-10) -> Optional[WaveSpec]:
    """Constant-sign case selector: a1, a2 (``D > 0``), b1, b2 (``D < 0``).

    Returns None when ``f`` touches or crosses the chord on ``(a, b)``.
    """
    if not a < b:
        raise ValueError("need a < b")
    g = a + (np.arange(n) + 0.5) * (b - a) / n
    dv = np.asarray(D.eval(g), dtype=float)
    dscale = float(np.max(np.abs(dv)))
    if dscale == 0 or (np.any(dv > 0) and np.any(dv < 0)):
        raise NotConstantSign(f"D changes sign in ({a}, {b})")
    positive = bool(np.all(dv > 0))
    if not positive and not np.all(dv < 0):
        raise NotConstantSign(f"D vanishes inside ({a}, {b})")
    ch = Chord.of(f, a, b)
    d = np.asarray(f.eval(g), dtype=float) - ch.eval(g)
    fmax = max(float(np.max(np.abs(f.eval(g)))), abs(ch.fa), abs(ch.fb), np.finfo(float).tiny)
    tol = strict_tol * fmax
    if np.min(d) > tol:
        above = True
    elif np.max(d) < -tol:
        above = False
    else:
        return None
    case = {(True, True): "a1", (True, False): "a2", (False, True): "b1", (False, False): "b2"}[
        (positive, above)]
    increasing = case in ("a1", "b2")
    margins = chord_conditions(f, a, [], b, n=n, strict_tol=strict_tol,
                               first_side="above" if above else "below")
    return WaveSpec(float(a), float(b), ch.slope, Regime.CONST_SIGN, f, D, None, (),
                    case=case, increasing=increasing, margins=margins)


# -- end-state families -----------------------------------------------------

@dataclass(frozen=True)
class EndState:
    m: float
    mu: float
    l_minus: float
    l_plus: float
    c: float
    margin_left: float
    margin_right: float
    candidates_left: Tuple[float, ...] = ()
    candidates_right: Tuple[float, ...] = ()

    def row(self):
        return (self.m, self.mu, self.l_minus, self.l_plus, self.c, self.margin_left, self.margin_right)


@dataclass
class EndStateFamily:
    alpha: float
    members: List[EndState]
    vbar: float = 1.0

    COLUMNS = ("m", "mu", "l_minus", "l_plus", "c", "margin_left", "margin_right")

    def __len__(self):
        return len(self.members)

    @property
    def empty(self) -> bool:
        return not self.members

    def as_array(self) -> np.ndarray:
        return np.array([m.row() for m in self.members], dtype=float).reshape(-1, 7)


def _side_roots(g, lo, hi, n):
    """Roots of ``g`` on ``[lo, hi]`` by grid bracketing; ``g`` is vectorized."""
    x = np.linspace(lo, hi, n + 1)
    y = np.asarray(g(x), dtype=float)
    out = []
    s = np.sign(y)
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        out.append(brentq(lambda r: float(g(np.asarray(r))), x[i], x[i + 1], xtol=ROOT_XTOL,
                          rtol=4 * np.finfo(float).eps))
    for i in np.flatnonzero(s == 0):
        out.append(float(x[i]))
    return out


def _member(f, alpha, m, n_grid, strict_tol, chord_n, vbar):
    lo, hi = f.domain
    fa = float(f.eval(alpha))

    def g(r):
        return f.eval(r) - (m * (np.asarray(r) - alpha) + fa)

    # stop the side grids short of alpha, where g vanishes by construction
    gap = 1e-9 * (hi - lo)
    left = sorted((r for r in _side_roots(g, lo, alpha - gap, n_grid) if r < alpha - gap),
                  key=lambda r: alpha - r)
    right = sorted((r for r in _side_roots(g, alpha + gap, hi, n_grid) if r > alpha + gap),
                   key=lambda r: r - alpha)
    for lm in left:
        for lp in right:
            cm = chord_conditions(f, lm, [alpha], lp, n=chord_n, strict_tol=strict_tol)
            if cm.holds:
                return EndState(float(m), float(m) / vbar, lm, lp, secant(f, lm, lp),
                                cm.margins[0], cm.margins[1], tuple(left), tuple(right))
    return None


def end_states_general(f: FluxModel, alpha: float, m_range: Optional[Tuple[float, float]] = None,
                       n_samples: int = 200, *, n_grid: int = 4096, strict_tol: float = 1e-10,
                       chord_n: int = 4000) -> EndStateFamily:
    """One-parameter family of end-state pairs for lines through ``(alpha, f(alpha))``.

    Slopes are sampled at midpoints of ``n_samples`` equal cells of
    ``m_range``. The default range runs from ``f'(alpha)`` (lines steeper
    downward cannot put ``f`` below the line right of ``alpha``) to the
    larger secant from ``alpha`` to a domain end.
    """
    lo, hi = f.domain
    if m_range is None:
        m_lo = float(f.deriv(alpha))
        m_hi = max(secant(f, lo, alpha), secant(f, alpha, hi))
        m_range = (m_lo, max(m_hi, m_lo))
    ms = m_range[0] + (np.arange(n_samples) + 0.5) * (m_range[1] - m_range[0]) / n_samples
    vbar = f.vbar
    found = pmap(lambda m: _member(f, alpha, float(m), n_grid, strict_tol, chord_n, vbar), ms)
    members = [m for m in found if m is not None]
    return EndStateFamily(float(alpha), members, vbar)


def end_state_for(f: FluxModel, alpha: float, *, l_plus: Optional[float] = None,
                  l_minus: Optional[float] = None, m: Optional[float] = None,
                  n_grid: int = 4096, strict_tol: float = 1e-10, chord_n: int = 20000) -> EndState:
    """The family member selected by one of ``l_plus``, ``l_minus`` or the slope ``m``."""
    given = [x is not None for x in (l_plus, l_minus, m)]
    if sum(given) != 1:
        raise ValueError("give exactly one of l_plus, l_minus, m")
    if l_plus is not None:
        m = secant(f, alpha, l_plus)
    elif l_minus is not None:
        m = secant(f, l_minus, alpha)
    mem = _member(f, alpha, float(m), n_grid, strict_tol, chord_n, f.vbar)
    if mem is None:
        raise ChordFailed(f"no admissible end states on the line of slope {m:.12g}", ())
    if l_plus is not None and abs(mem.l_plus - l_plus) > 1e-9:
        raise ChordFailed(f"line through l_plus={l_plus} admits the pair ending at {mem.l_plus}", ())
    if l_minus is not None and abs(mem.l_minus - l_minus) > 1e-9:
        raise ChordFailed(f"line through l_minus={l_minus} admits the pair starting at {mem.l_minus}", ())
    return mem


def end_states_D2(f: FluxModel, alpha: float, beta: float, *, n_grid: int = 4096,
                  strict_tol: float = 1e-10, chord_n: int = 20000) -> Optional[EndState]:
    """Under D2 the line is fixed by ``alpha`` and ``beta``; find ``l_minus``, ``l_plus``."""
    lo, hi = f.domain
    m = secant(f, alpha, beta)
    fa = float(f.eval(alpha))

    def g(r):
        return f.eval(r) - (m * (np.asarray(r) - alpha) + fa)

    gap = 1e-9 * (hi - lo)
    left = sorted((r for r in _side_roots(g, lo, alpha - gap, n_grid) if r < alpha - gap),
                  key=lambda r: alpha - r)
    right = sorted((r for r in _side_roots(g, beta + gap, hi, n_grid) if r > beta + gap),
                   key=lambda r: r - beta)
    for lm in left:
        for lp in right:
            cm = chord_conditions(f, lm, [alpha, beta], lp, n=chord_n, strict_tol=strict_tol)
            if cm.holds:
                return EndState(m, m / f.vbar, lm, lp, secant(f, lm, lp), cm.margins[0],
                                cm.margins[2], tuple(left), tuple(right))
    return None


# -- cubic flux f = rho (1 - rho)^2 ------------------------------------------

@dataclass(frozen=True)
class MuWindow:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return not self.lo < self.hi

    def __contains__(self, mu) -> bool:
        return self.lo < mu < self.hi

    def as_tuple(self):
        return (self.lo, self.hi)


def mu_window(alpha: float) -> MuWindow:
    """Open interval of normalized slopes ``mu`` admissible for the cubic flux."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return MuWindow((1.0 - alpha) * (1.0 - 3.0 * alpha), -alpha * (1.0 - alpha))


def mu_from_rho(alpha: float, rho: float) -> float:
    """Normalized slope of the line through ``alpha`` meeting the cubic flux at ``rho``."""
    return rho * rho - (2.0 - alpha) * rho + (1.0 - alpha) ** 2


def cubic_end_states(alpha: float, mu: float) -> Tuple[float, float]:
    """Roots ``rho_-, rho_+`` of ``rho^2 - (2 - alpha) rho + (1 - alpha)^2 - mu``.

    Refuses unless ``0 < rho_- < alpha < rho_+ < 1``; the refusal lists the
    failed checks among ``discriminant``, ``rho_minus_positive``,
    ``rho_minus_below_alpha``, ``alpha_below_rho_plus``,
    ``rho_plus_below_one``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    k = (1.0 - alpha) * (1.0 - 3.0 * alpha)
    failed = []
    if not mu > -alpha * (1.0 - 0.75 * alpha):
        failed.append("discriminant")
    if not mu < (1.0 - alpha) ** 2:
        failed.append("rho_minus_positive")
    if not (alpha > 2.0 / 3.0 or mu > k):
        failed.append("rho_minus_below_alpha")
    if not (alpha < 2.0 / 3.0 or mu > k):
        failed.append("alpha_below_rho_plus")
    if not mu < -alpha * (1.0 - alpha):
        failed.append("rho_plus_below_one")
    if failed:
        raise OutsideWindow(f"mu={mu!r} outside the window for alpha={alpha!r}: {', '.join(failed)}",
                            failed)
    disc = math.sqrt(-3.0 * alpha * alpha + 4.0 * alpha + 4.0 * mu)
    rp = 0.5 * (2.0 - alpha + disc)
    # the smaller root from the product of roots avoids cancellation
    rm = ((1.0 - alpha) ** 2 - mu) / rp
    return rm, rp


def alpha_from_sigma(sigma: float) -> float:
    """Unique ``alpha`` in ``(0, 1)`` with ``(1 - alpha)^3 = sigma * alpha``."""
    if not sigma > 0:
        raise NonPositiveSigma("sigma must be positive")
    return brentq(lambda a: (1.0 - a) ** 3 - sigma * a, 0.0, 1.0, xtol=1e-15,
                  rtol=4 * np.finfo(float).eps)


def sigma_from_alpha(alpha: float) -> float:
    return (1.0 - alpha) ** 3 / alpha


# -- closed-form checks ------------------------------------------------

@dataclass(frozen=True)
class CubicLawAdmissibility:
    admissible: bool
    v_alpha: float
    v_alpha_integrated: float
    grid_min: float


def cubic_velocity(alpha: float, beta: float) -> VelocityLaw:
    """``v`` with ``v' = -(rho - alpha)(rho - beta)`` and ``v(1) = 0``."""
    s, p = alpha + beta, alpha * beta
    g0 = 1.0 / 3.0 - s / 2.0 + p

    def v(r):
        r = np.asarray(r, dtype=float)
        return -r**3 / 3.0 + s / 2.0 * r**2 - p * r + g0

    def dv(r):
        r = np.asarray(r, dtype=float)
        return -(r - alpha) * (r - beta)

    def d2v(r):
        return -2.0 * np.asarray(r, dtype=float) + s

    return VelocityLaw.custom(v, dv, d2v, name=f"cubic({alpha},{beta})")


def cubic_law_admissible(alpha: float, beta: float, n_grid: int = 2001) -> CubicLawAdmissibility:
    """Admissibility ``3 beta - 2 < alpha < beta`` with ``v(alpha)`` two ways."""
    if not alpha < beta:
        raise BadOrdering("need alpha < beta")
    va = (alpha - 1.0) ** 2 * (alpha - 3.0 * beta + 2.0) / 6.0
    law = cubic_velocity(alpha, beta)
    vi = float(law.eval(alpha))
    gmin = float(np.min(law.eval(np.linspace(0.0, 1.0, n_grid))))
    return CubicLawAdmissibility(3.0 * beta - 2.0 < alpha, va, vi, gmin)


@dataclass(frozen=True)
class CriticalDensityZero:
    beta: float
    h_beta: float
    dh_beta: float
    dh_beta_closed: float
    a: float
    gamma: float
    w: float


def critical_density_h(a, gamma, w):
    """``h`` and ``h'`` on ``(a, 1)``; the sign of ``D`` there is the sign of ``h``."""
    k = gamma * w * (1.0 - a)

    def h(r):
        r = np.asarray(r, dtype=float)
        return (1.0 - r) ** 2 / (k * r) - np.exp(gamma * (a - r) / (1.0 - r))

    def dh(r):
        r = np.asarray(r, dtype=float)
        e = np.exp(gamma * (a - r) / (1.0 - r))
        return -(1.0 - r * r) / (k * r * r) - e * gamma * (a - 1.0) / (1.0 - r) ** 2

    return h, dh


def critical_density_beta(a: float, gamma: float, w: float, n_grid: int = 4096) -> CriticalDensityZero:
    """Zero ``beta`` of ``D`` for the exponential law with critical density ``a``."""
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    if gamma <= 0 or not 0.0 < w <= 1.0:
        raise ValueError("need gamma > 0 and w in (0, 1]")
    failed = []
    if not gamma > (1.0 - a) / (a * w):
        failed.append("gamma > (1-a)/(a*w)")
    if not gamma >= (1.0 + a) / a:
        failed.append("gamma >= (1+a)/a")
    if failed:
        raise ConditionsNotMet("conditions not met: " + "; ".join(failed), failed)
    h, dh = critical_density_h(a, gamma, w)
    x = np.linspace(a, 1.0, n_grid + 1)[1:-1]
    y = h(x)
    idx = np.flatnonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)
    if idx.size != 1:
        raise ConditionsNotMet(f"expected one sign change of h, found {idx.size}", ["uniqueness"])
    i = int(idx[0])
    beta = brentq(lambda r: float(h(r)), x[i], x[i + 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
    k = gamma * w * (1.0 - a)
    closed = (beta * beta + gamma * (1.0 - a) * beta - 1.0) / (k * beta * beta)
    d = float(dh(beta))
    if not d > 0:
        raise ConditionsNotMet(f"h'(beta) = {d} is not positive", ["h'(beta) > 0"])
    return CriticalDensityZero(beta, float(h(beta)), d, closed, a, gamma, w)


def critical_density_models(a: float, gamma: float, w: float, vbar: float = 1.0, tau: float = 1.0):
    """Exponential law with critical density ``a`` and the Nelson diffusivity, ``vbar = w delta/tau``."""
    v = VelocityLaw.exponential(gamma, a=a, vbar=vbar)
    D = build_diffusivity(DiffusivityKind.NELSON_DELTA_TAU, v, delta=vbar * tau / w, tau=tau)
    return build_flux(v), D


@dataclass
class CounterexamplePair:
    velocity: VelocityLaw
    flux: FluxModel
    diffusivity: object
    fcm_ok: bool
    pattern: SignPattern
    d1_ok: bool
    formula_dev: float
    chord_fails: bool
    safety_fails: bool
    family_size: int


@dataclass
class CounterexampleResult:
    first: CounterexamplePair
    second: CounterexamplePair

    @property
    def verdict_ok(self) -> bool:
        return all(p.fcm_ok and p.d1_ok and p.chord_fails and p.safety_fails
                   for p in (self.first, self.second))


def _fcm_ok(v: VelocityLaw, n=10001, tol=1e-12):
    grid = np.linspace(0.0, 1.0, n)[:-1]
    return abs(float(v.eval(1.0))) <= tol and float(np.min(v.eval(grid))) >= -tol


def nelson_counterexamples(alpha: float, delta: float, tau: float,
                           n_samples: int = 200) -> CounterexampleResult:
    """Two explicit laws with ``v(1) = 0``, ``v >= 0`` and a D1 pattern for the
    Nelson ``D`` that still fail the chord conditions and ``vbar <= delta/tau``."""
    if not 0.0 < alpha < 1.0 or delta <= 0 or tau <= 0:
        raise ValueError("need alpha in (0, 1) and positive delta, tau")
    k = delta / (alpha * tau)
    amp = delta**2 / (alpha**2 * tau)
    v1 = VelocityLaw.custom(lambda r: k * (1.0 - np.asarray(r, dtype=float)),
                            lambda r: -k + 0.0 * np.asarray(r, dtype=float),
                            lambda r: 0.0 * np.asarray(r, dtype=float), vbar=k, name="nelson_v1")
    v2 = VelocityLaw.custom(
        lambda r: 0.5 * k * (1.0 - np.asarray(r, dtype=float)) * (1.0 + 2.0 * alpha - np.asarray(r, dtype=float)),
        lambda r: -k * (1.0 + alpha - np.asarray(r, dtype=float)),
        lambda r: k + 0.0 * np.asarray(r, dtype=float),
        vbar=0.5 * k * (1.0 + 2.0 * alpha), name="nelson_v2")
    d1 = lambda r: amp * r * (alpha - r)  # noqa: E731
    d2 = lambda r: amp * r * (alpha - r) * (1.0 - r) * (1.0 + alpha - r)  # noqa: E731
    pairs = []
    for v, closed in ((v1, d1), (v2, d2)):
        D = build_diffusivity(DiffusivityKind.NELSON_DELTA_TAU, v, delta=delta, tau=tau)
        f = build_flux(v)
        pat = sign_pattern(D)
        grid = np.linspace(0.0, 1.0, 1001)
        dev = float(np.max(np.abs(D.eval(grid) - closed(grid))))
        d1_ok = pat.classification is PatternKind.D1 and abs(pat.alpha - alpha) < 1e-9
        fam = end_states_general(f, alpha, n_samples=n_samples)
        safety = D.safety_velocity_ok()
        pairs.append(CounterexamplePair(v, f, D, _fcm_ok(v), pat, d1_ok, dev, fam.empty,
                                 safety is False, len(fam)))
    return CounterexampleResult(*pairs)


@dataclass
class DeltaFormVerdict:
    fcm_ok: bool
    d1_ok: bool
    violated: List[str]
    pattern: SignPattern

    @property
    def consistent(self) -> bool:
        """True when at least one hypothesis fails, as the impossibility demands."""
        return bool(self.violated)


def delta_form_verdict(v: VelocityLaw, a=None, da=None, tol: float = 1e-12,
                       n: int = 10001) -> DeltaFormVerdict:
    """Check that ``D = -a(rho) v'(rho)`` never combines ``v(1) = 0``, ``v >= 0`` and a D1 pattern.

    ``a`` defaults to ``rho`` (the ``DeltaOnly`` form with unit ``delta``);
    ``da`` is its derivative, by central differences when omitted.
    """
    from fbwave.models import DiffusivityModel

    if a is None:
        a = lambda r: np.asarray(r, dtype=float)  # noqa: E731
        da = lambda r: np.ones_like(np.asarray(r, dtype=float))  # noqa: E731
    elif da is None:
        da = lambda r: (a(np.asarray(r) + 1e-6) - a(np.asarray(r) - 1e-6)) / 2e-6  # noqa: E731

    lo, hi = v.domain
    D = DiffusivityModel.direct(lambda r: -a(r) * v.deriv(r),
                                lambda r: -da(r) * v.deriv(r) - a(r) * v.deriv2(r),
                                domain=(lo, hi))
    pat = sign_pattern(D)
    violated = []
    grid = np.linspace(lo, hi, n)[:-1]
    vals = v.eval(grid)
    if abs(float(v.eval(1.0))) > tol:
        violated.append("fcm: v(1) != 0")
    if float(np.min(vals)) < -tol:
        i = int(np.argmin(vals))
        violated.append(f"fcm: v < 0 at rho={grid[i]:.6g}")
    d1 = pat.classification is PatternKind.D1
    if not d1:
        violated.append(f"D1: pattern is {pat.classification.value}")
    return DeltaFormVerdict(not any(s.startswith("fcm") for s in violated), d1, violated, pat)
