"""Vanishing-viscosity families ``phi_eps`` for the diffusivity ``eps * D``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from fbwave._parallel import pmap
from fbwave.errors import OrderingViolated, SlopeAssumptionViolated
from fbwave.existence import Regime, WaveSpec
from fbwave.profile import Plateau, Profile, insert_plateau, xi_of_phi

DEFAULT_EPS = (1.0, 0.5, 0.1, 0.01, 0.001)


@dataclass(frozen=True)
class StepLimit:
    """Piecewise-constant limit: ``levels[k]`` on ``(jumps[k-1], jumps[k])``."""

    levels: Tuple[float, ...]
    jumps: Tuple[float, ...]
    c: float

    def __call__(self, xi):
        x = np.asarray(xi, dtype=float)
        idx = np.searchsorted(np.asarray(self.jumps), x, side="right")
        return np.asarray(self.levels)[idx]

    @property
    def l_minus(self) -> float:
        return self.levels[0]

    @property
    def l_plus(self) -> float:
        return self.levels[-1]


def limit_of(p: Profile) -> StepLimit:
    """The step obtained by shrinking every branch of ``p`` to zero length."""
    levels = [p.segments[0].end]
    jumps = []
    cur = 0.0
    for seg in p.segments[1:]:
        if isinstance(seg, Plateau):
            if seg.length > 0:
                jumps.append(cur)
                levels.append(seg.value)
                cur += seg.length
    jumps.append(cur)
    levels.append(p.segments[-1].end)
    return StepLimit(tuple(float(v) for v in levels), tuple(jumps), p.c)


@dataclass
class ViscousFamily:
    eps_list: Tuple[float, ...]
    base: Profile
    profiles: Dict[float, Profile]
    limit: StepLimit
    spot_checks: Dict[float, float] = field(default_factory=dict)

    @property
    def spec(self) -> WaveSpec:
        return self.base.spec

    def samples(self):
        """Rows ``(eps, xi, phi)`` in the order of ``eps_list``."""
        rows = []
        for e in self.eps_list:
            xi, phi, _ = self.profiles[e].samples()
            rows.append(np.column_stack([np.full_like(xi, e), xi, phi]))
        return np.vstack(rows)


def _check_slope(spec: WaveSpec):
    if spec.regime is Regime.D1_FRONT:
        dD = float(spec.diffusivity.deriv(spec.alpha))
        if not dD < 0:
            raise SlopeAssumptionViolated(f"D'(alpha) = {dD!r} is not negative")


def rescaling_deviation(p_eps: Profile, base: Profile, eps: float, xi) -> float:
    """``max |phi_eps(xi) - phi_1(xi/eps)|`` (plateau-free families)."""
    xi = np.asarray(xi, dtype=float)
    return float(np.max(np.abs(p_eps.phi_at(xi) - base.phi_at(xi / eps))))


def build_family(spec_or_profile, eps_list: Sequence[float] = DEFAULT_EPS, *,
                 xi1: float = 0.0, resolve: Sequence[float] = (), n: int = 400,
                 check_points: Optional[Sequence[float]] = None) -> ViscousFamily:
    """``phi_eps`` by exact rescaling of the ``eps = 1`` profile.

    ``resolve`` lists ``eps`` values recomputed from scratch with ``eps * D``;
    the sup deviation from the rescaled profile at ``check_points`` (scaled
    by ``eps``) is stored in ``spot_checks``. Plateaus keep their length.
    """
    eps_list = tuple(float(e) for e in eps_list)
    if any(not 0 < e <= 1 for e in eps_list):
        raise ValueError("eps values must lie in (0, 1]")
    if list(eps_list) != sorted(eps_list, reverse=True):
        raise ValueError("eps_list must be descending")
    if isinstance(spec_or_profile, Profile):
        base = spec_or_profile
        spec = base.spec
    else:
        spec = spec_or_profile
        _check_slope(spec)
        base = xi_of_phi(spec, n=n)
        if xi1 > 0:
            base = insert_plateau(base, xi1)
    _check_slope(spec)
    profiles = {e: (base if e == 1.0 else base.rescaled(e)) for e in eps_list}
    fam = ViscousFamily(eps_list, base, profiles, limit_of(base))
    pts = np.asarray(check_points if check_points is not None else np.linspace(-3, 3, 25))

    def spot(e):
        direct = xi_of_phi(spec, n=n, diff=spec.diffusivity.scaled(e))
        plat = base.xi1
        if plat > 0:
            direct = insert_plateau(direct, plat)
        x = pts * e
        return float(np.max(np.abs(direct.phi_at(x) - profiles[e].phi_at(x))))

    res = pmap(spot, [float(e) for e in resolve])
    fam.spot_checks.update(dict(zip((float(e) for e in resolve), res)))
    return fam


@dataclass
class OrderingReport:
    passed: bool
    worst: float
    worst_at: Optional[Tuple[float, float, float]]
    allowed_ties: int
    resolution_ties: int
    mirrored_passed: bool
    mirrored_worst: float
    mirrored_label: str = "extrapolated"

    def to_dict(self) -> dict:
        return {"passed": self.passed, "worst_excess": self.worst,
                "worst_at": list(self.worst_at) if self.worst_at else None,
                "allowed_ties": self.allowed_ties, "resolution_ties": self.resolution_ties,
                "mirrored_passed": self.mirrored_passed, "mirrored_worst_excess": self.mirrored_worst,
                "mirrored_label": self.mirrored_label}


def _default_xi_grid():
    g = np.geomspace(1e-4, 1e2, 241)
    return -g[::-1]


def ordering_check(fam: ViscousFamily, xi=None, tol: float = 1e-12,
                   raise_on_violation: bool = False) -> OrderingReport:
    """``phi_eps1(xi) <= phi_eps2(xi)`` on ``xi < 0`` for ``eps1 < eps2``.

    Equal values are allowed at a sharp contact with ``l_minus = 0``; equal
    values within ``tol`` of an asymptotic end state are counted as
    resolution ties. The reversed inequality on ``xi > 0`` is reported
    separately and labelled extrapolated.
    """
    xi = np.asarray(_default_xi_grid() if xi is None else xi, dtype=float)
    xneg = xi[xi < 0]
    xpos = -xneg[::-1]
    if fam.base.plateaus:
        xpos = xpos + fam.base.xi1
    inc = fam.base.increasing
    lo_end = fam.base.segments[0].end
    sharp_lo = fam.base.sharp_left and lo_end == 0.0
    eps = sorted(fam.eps_list)
    vals = {e: fam.profiles[e].phi_at(xneg) for e in eps}
    pvals = {e: fam.profiles[e].phi_at(xpos) for e in eps}
    sgn = 1.0 if inc else -1.0
    worst, worst_at = -math.inf, None
    mworst = -math.inf
    allowed = resolution = 0
    for i, e1 in enumerate(eps):
        for e2 in eps[i + 1:]:
            d = sgn * (vals[e1] - vals[e2])
            k = int(np.argmax(d))
            if d[k] > worst:
                worst, worst_at = float(d[k]), (float(xneg[k]), e1, e2)
            ties = vals[e1] == vals[e2]
            at_contact = ties & (vals[e1] == lo_end)
            allowed += int(np.count_nonzero(at_contact)) if sharp_lo else 0
            near = np.abs(vals[e1] - vals[e2]) <= tol
            if sharp_lo:
                near &= ~at_contact
            resolution += int(np.count_nonzero(near & (np.abs(vals[e1] - lo_end) <= 1e-9)))
            md = sgn * (pvals[e2] - pvals[e1])
            mworst = max(mworst, float(np.max(md)))
    passed = worst <= tol
    if not passed and raise_on_violation:
        x, e1, e2 = worst_at
        raise OrderingViolated(f"phi_{e1}({x}) exceeds phi_{e2}({x}) by {worst:.3e}", x, e1, e2)
    return OrderingReport(passed, worst, worst_at, allowed, resolution, mworst <= tol, mworst)


@dataclass
class ConvergenceReport:
    eps: Tuple[float, ...]
    d: Tuple[float, ...]
    delta: float
    conv_tol: float
    monotone: bool
    converged: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.converged

    def to_dict(self) -> dict:
        return {"eps": list(self.eps), "d_eps": list(self.d), "delta": self.delta,
                "conv_tol": self.conv_tol, "monotone": self.monotone,
                "converged": self.converged, "passed": self.passed}


def sup_distance(p: Profile, limit: StepLimit, delta: float) -> float:
    """``sup |phi - phi_0|`` over ``xi`` at distance ``>= delta`` from every jump.

    Both functions are monotone between jumps, so the supremum sits at the
    edges ``x_j -/+ delta`` of the excluded windows.
    """
    pts = []
    J = list(limit.jumps)
    for j, x in enumerate(J):
        for s in (x - delta, x + delta):
            if all(abs(s - y) >= delta - 1e-15 for y in J):
                pts.append(s)
    pts = np.asarray(pts)
    return float(np.max(np.abs(p.phi_at(pts) - limit(pts))))


def convergence_check(fam: ViscousFamily, delta: float = 0.1, conv_tol: float = 1e-3,
                      mono_tol: float = 1e-12) -> ConvergenceReport:
    d = tuple(sup_distance(fam.profiles[e], fam.limit, delta) for e in fam.eps_list)
    mono = all(b <= a + mono_tol for a, b in zip(d, d[1:]))
    return ConvergenceReport(fam.eps_list, d, delta, conv_tol, mono, d[-1] < conv_tol)


@dataclass
class RHReport:
    total: float
    sub_jumps: Tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max((self.total,) + self.sub_jumps)

    def to_dict(self) -> dict:
        return {"total": self.total, "sub_jumps": list(self.sub_jumps),
                "max_residual": self.max_residual}


def rankine_hugoniot_check(limit: StepLimit, f, l_plus: Optional[float] = None) -> RHReport:
    """Residuals ``|f(b) - f(a) - c (b - a)|`` of the whole jump and of each sub-jump."""
    levels = list(limit.levels)
    if l_plus is not None:
        levels[-1] = l_plus
    fv = [float(f.eval(v)) for v in levels]
    c = limit.c
    total = abs(fv[-1] - fv[0] - c * (levels[-1] - levels[0]))
    subs = tuple(abs(fv[k + 1] - fv[k] - c * (levels[k + 1] - levels[k]))
                 for k in range(len(levels) - 1)) if len(levels) > 2 else ()
    return RHReport(total, subs)
