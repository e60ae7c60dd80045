"""Wavefront profiles.

The primary method integrates ``dxi/dphi = D(phi)/F(phi)`` in the state
variable, branch by branch, starting from a zero of ``D`` (or the midpoint
of a constant-sign interval). An end state is reached at finite ``xi``
(sharp) exactly when the tail integral converges; otherwise the profile
approaches it exponentially and the samples stop at ``tail_tol``.

An explicit ODE integration in ``xi`` serves as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from fbwave._kernels import STATUS_UNDERFLOW, KernelContext
from fbwave.errors import NegativeXi1, QuadratureDivergence, StiffnessFailure
from fbwave.existence import Regime, WaveSpec

TAIL_TOL = 1e-8
XI_HORIZON = 1e6
NODE_GAP = 1e-9
QUAD_RTOL = 1e-13
QUAD_ATOL = 1e-300


@dataclass(frozen=True)
class TailInfo:
    """How a branch meets its far end state."""

    end: float
    sharp: bool
    d_end: float
    ratio: float
    rate: float = float("nan")
    eta_last: float = 0.0
    reached: bool = True

    @property
    def predicted_sharp(self) -> bool:
        return self.d_end == 0.0


@dataclass(frozen=True)
class Plateau:
    value: float
    length: float


@dataclass
class Branch:
    """Monotone piece from ``node`` toward ``end`` with ``I(phi) = int_node^phi D/F``.

    ``I`` grows in absolute value away from the node; the profile places
    the node at ``xi_node`` and ``xi = xi_node + scale * I(phi)``.
    """

    node: float
    end: float
    ctx: KernelContext = field(repr=False)
    phi: np.ndarray = field(repr=False)
    I: np.ndarray = field(repr=False)
    tail: TailInfo
    scale: float = 1.0
    capped: int = 0

    @property
    def reachable(self) -> bool:
        return self.tail.sharp

    @property
    def outbound(self) -> bool:
        """True when ``xi`` increases from the node toward the end."""
        return bool(self.I[-1] > 0)

    @property
    def length(self) -> float:
        return abs(self.I[-1]) * self.scale if self.reachable else math.inf

    def exact_I(self, phi: float) -> float:
        L = self.end - self.node
        t = (phi - self.node) / L
        if t < 0 or t > 1 + 1e-15:
            raise ValueError(f"phi={phi} outside the branch [{self.node}, {self.end}]")
        if t >= 1 and not self.reachable:
            raise QuadratureDivergence(
                f"end state {self.end} is approached asymptotically; xi is unbounded there")
        tt = (self.phi - self.node) / L
        k = int(np.searchsorted(tt, t, side="right")) - 1
        k = min(max(k, 0), len(tt) - 1)
        if self.phi[k] == phi:
            return float(self.I[k])
        a, b = sorted((self.phi[k], phi))
        v = float(self.ctx.gk_integrate(np.array([a]), np.array([b]), QUAD_RTOL, QUAD_ATOL)[0][0])
        return float(self.I[k]) + (v if phi > self.phi[k] else -v)

    def phi_of_I(self, s: float) -> float:
        """Invert ``I``; beyond the last sample of an asymptotic tail the
        exponential rate of the last two samples is used."""
        absI = np.abs(self.I)
        a = abs(s)
        if a <= absI[-1]:
            k = int(np.searchsorted(absI, a, side="right")) - 1
            k = min(max(k, 0), len(absI) - 2)
            if absI[k] == a:
                return float(self.phi[k])
            lo, hi = self.phi[k], self.phi[k + 1]
            g = lambda p: abs(self.exact_I(p)) - a  # noqa: E731
            return float(brentq(g, min(lo, hi), max(lo, hi), xtol=1e-16, rtol=4 * np.finfo(float).eps))
        if self.reachable:
            return float(self.end)
        eta = self.tail.eta_last * math.exp(-self.tail.rate * (a - absI[-1]))
        return float(self.end - math.copysign(eta, self.end - self.node))

    def dphi(self, phi) -> np.ndarray:
        g = np.asarray(self.ctx.integrand(np.asarray(phi, dtype=float)), dtype=float)
        with np.errstate(divide="ignore"):
            return 1.0 / (g * self.scale)


Segment = object  # Branch or Plateau


@dataclass
class Profile:
    """A sampled wavefront with exact evaluation through its branches.

    ``segments`` run in increasing ``xi``. The first branch ends at
    ``xi = 0`` (the anchor ``xi0``); plateaus keep their length under
    :meth:`rescaled`.
    """

    spec: WaveSpec = field(repr=False)
    segments: List[Segment] = field(repr=False)
    zero_labels: Tuple[str, ...] = ()
    slope: dict = field(default_factory=dict)
    scale: float = 1.0
    n_plateau: int = 21

    def __post_init__(self):
        self._layout()

    # -- layout ---------------------------------------------------------
    def _layout(self):
        starts, ends, nodes = [], [], []
        first = self.segments[0]
        if not isinstance(first, Branch) or first.outbound:
            raise ValueError("the first segment must be a branch ending at xi = 0")
        cur = 0.0
        starts.append(-first.length)
        ends.append(0.0)
        nodes.append(0.0)
        for seg in self.segments[1:]:
            starts.append(cur)
            nodes.append(cur)
            if isinstance(seg, Plateau):
                cur = cur + seg.length
            else:
                if not seg.outbound:
                    raise ValueError("only the first branch may run toward xi = 0")
                cur = cur + seg.length
            ends.append(cur)
        self._starts, self._ends, self._nodes = starts, ends, nodes

    # -- metadata -------------------------------------------------------
    @property
    def c(self) -> float:
        return self.spec.c

    @property
    def increasing(self) -> bool:
        return self.spec.increasing

    @property
    def branches(self) -> List[Branch]:
        return [s for s in self.segments if isinstance(s, Branch)]

    @property
    def plateaus(self) -> List[Tuple[float, float, float]]:
        return [(self._starts[i], self._ends[i], s.value) for i, s in enumerate(self.segments)
                if isinstance(s, Plateau) and s.length > 0]

    def _zero_positions(self):
        """``xi`` where each zero of ``D`` is first and last attained."""
        out = [(0.0, 0.0)]
        for i, s in enumerate(self.segments[1:], start=1):
            if isinstance(s, Plateau):
                out[-1] = (out[-1][0], self._ends[i])
            elif s.reachable and i < len(self.segments) - 1:
                out.append((self._ends[i], self._ends[i]))
        return out

    @property
    def xi0(self) -> float:
        return 0.0

    @property
    def xi1(self) -> float:
        return self._zero_positions()[0][1]

    @property
    def xi2(self) -> Optional[float]:
        z = self._zero_positions()
        return z[1][0] if len(z) > 1 else None

    @property
    def xi3(self) -> Optional[float]:
        z = self._zero_positions()
        return z[1][1] if len(z) > 1 else None

    @property
    def left_tail(self) -> TailInfo:
        return self.segments[0].tail

    @property
    def right_tail(self) -> TailInfo:
        return self.segments[-1].tail

    @property
    def sharp_left(self) -> bool:
        return self.left_tail.sharp

    @property
    def sharp_right(self) -> bool:
        return self.right_tail.sharp

    @property
    def xi_a(self) -> Optional[float]:
        return self._starts[0] if self.sharp_left else None

    @property
    def xi_b(self) -> Optional[float]:
        return self._ends[-1] if self.sharp_right else None

    def contact(self, side: str) -> float:
        """Finite contact abscissa on ``side`` ('left' or 'right')."""
        val = self.xi_a if side == "left" else self.xi_b
        if val is None:
            tail = self.left_tail if side == "left" else self.right_tail
            raise QuadratureDivergence(
                f"the {side} end state {tail.end} is approached asymptotically (no contact)")
        return val

    @property
    def slope_at_alpha(self) -> float:
        return self.slope.get("value", float("nan"))

    @property
    def slope_kind(self) -> str:
        return self.slope.get("kind", "none")

    @property
    def phi_range(self) -> Tuple[float, float]:
        return (self.spec.l_minus, self.spec.l_plus)

    # -- evaluation -----------------------------------------------------
    def _locate(self, xi):
        for i, (a, b) in enumerate(zip(self._starts, self._ends)):
            if xi <= b or i == len(self.segments) - 1:
                return i
        return len(self.segments) - 1

    def phi_at(self, xi):
        """Exact ``phi(xi)`` (brentq on the quadrature ``xi(phi)``)."""
        scalar = np.isscalar(xi)
        xs = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty_like(xs)
        for j, x in enumerate(xs):
            i = self._locate(x)
            seg = self.segments[i]
            if isinstance(seg, Plateau):
                out[j] = seg.value
                continue
            if i == 0 and x < self._starts[0]:
                out[j] = seg.end
                continue
            if i == len(self.segments) - 1 and x > self._ends[-1]:
                out[j] = seg.end
                continue
            out[j] = seg.phi_of_I((x - self._nodes[i]) / seg.scale)
        return float(out[0]) if scalar else out

    def xi_at(self, phi):
        """``xi`` at which the profile first attains ``phi``."""
        scalar = np.isscalar(phi)
        ps = np.atleast_1d(np.asarray(phi, dtype=float))
        out = np.empty_like(ps)
        for j, p in enumerate(ps):
            for i, seg in enumerate(self.segments):
                if isinstance(seg, Plateau):
                    if p == seg.value:
                        out[j] = self._starts[i]
                        break
                    continue
                lo, hi = sorted((seg.node, seg.end))
                if lo <= p <= hi:
                    out[j] = self._nodes[i] + seg.scale * seg.exact_I(p)
                    break
            else:
                raise ValueError(f"phi={p} outside the profile range")
        return float(out[0]) if scalar else out

    def samples(self):
        """``(xi, phi, dphi)`` in increasing ``xi``; ``dphi`` is NaN on plateaus,
        at plateau junctions and at sharp contacts."""
        xs, ps, ds = [], [], []
        for i, seg in enumerate(self.segments):
            if isinstance(seg, Plateau):
                if seg.length <= 0:
                    continue
                x = np.linspace(self._starts[i], self._ends[i], self.n_plateau)
                xs.append(x)
                ps.append(np.full_like(x, seg.value))
                ds.append(np.full_like(x, np.nan))
                continue
            x = self._nodes[i] + seg.scale * seg.I
            p = seg.phi.copy()
            d = seg.dphi(p)
            if seg.tail.sharp:
                d[-1] = np.nan
            if i == 0:
                x, p, d = x[::-1], p[::-1], d[::-1]
            xs.append(x)
            ps.append(p)
            ds.append(d)
        for k in range(len(self.segments)):
            if isinstance(self.segments[k], Plateau) and self.segments[k].length > 0:
                # one-sided derivatives meet the plateau
                if k - 1 >= 0:
                    ds[k - 1][-1] = np.nan
                if k + 1 < len(ds):
                    ds[k + 1][0] = np.nan
        xi = np.concatenate(xs)
        phi = np.concatenate(ps)
        dphi = np.concatenate(ds)
        keep = np.ones(xi.size, dtype=bool)
        keep[1:] = (xi[1:] != xi[:-1]) | (phi[1:] != phi[:-1])
        return xi[keep], phi[keep], dphi[keep]

    @property
    def xi(self):
        return self.samples()[0]

    @property
    def phi(self):
        return self.samples()[1]

    @property
    def dphi(self):
        return self.samples()[2]

    def divided_slope(self, eta: float) -> float:
        """Central divided difference of ``phi`` across the first zero of ``D``."""
        left, right = self.segments[0], self._first_outbound()
        pl = left.node + math.copysign(eta, left.end - left.node)
        pr = right.node + math.copysign(eta, right.end - right.node)
        xl = left.scale * left.exact_I(pl)
        xr = right.scale * right.exact_I(pr)
        return (pr - pl) / (xr - xl)

    def _first_outbound(self) -> Branch:
        for s in self.segments[1:]:
            if isinstance(s, Branch):
                return s
        raise ValueError("profile has a single branch")

    def contact_flux(self, side: str = "left", n: int = 8) -> np.ndarray:
        """``|D(phi) phi'|`` at the samples approaching a contact (tends to 0)."""
        seg = self.segments[0] if side == "left" else self.segments[-1]
        p = seg.phi[-n:]
        _, _, D, _ = seg.ctx.eval_models(p)
        return np.abs(np.asarray(D) * seg.dphi(p))

    def junction_flux_residual(self) -> float:
        """Jump of ``D phi' - (f - c phi)`` across plateau junctions."""
        res = 0.0
        for s in self.plateaus:
            z = s[2]
            f, _, D, _ = self.branches[0].ctx.eval_models(np.array([z]))
            sl = self.slope.get("value", 0.0)
            sl = 0.0 if not math.isfinite(sl) else sl
            res = max(res, abs(float(D[0]) * sl / self.scale),
                      abs(float(self.spec.F(z))))
        return res

    @property
    def c1_at_junctions(self) -> bool:
        """Plateau junctions are C^1 only when the one-sided slope is zero."""
        if not self.plateaus:
            return True
        return self.slope_kind == "finite" and abs(self.slope_at_alpha) <= 1e-12

    def rescaled(self, eps: float) -> "Profile":
        """Profile for ``eps * D``: every branch shrinks by ``eps``, plateaus stay."""
        if not eps > 0:
            raise ValueError("eps must be positive")
        segs = [replace(s, scale=s.scale * eps) if isinstance(s, Branch) else s for s in self.segments]
        sl = dict(self.slope)
        if "value" in sl:
            sl["value"] = sl["value"] / eps
        return Profile(self.spec, segs, self.zero_labels, sl, self.scale * eps, self.n_plateau)

    @property
    def capped_pieces(self) -> int:
        return sum(b.capped for b in self.branches)

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            x = float(x)
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf") if not math.isnan(x) else None

        return {
            "regime": self.spec.regime.value,
            "case": self.spec.case,
            "c": self.c,
            "l_minus": self.spec.l_minus,
            "l_plus": self.spec.l_plus,
            "increasing": self.increasing,
            "eps": self.scale,
            "xi0": 0.0,
            "xi1": self.xi1,
            "xi2": self.xi2,
            "xi3": self.xi3,
            "sharp_left": self.sharp_left,
            "sharp_right": self.sharp_right,
            "xi_a": num(self.xi_a),
            "xi_b": num(self.xi_b),
            "slope_at_alpha": num(self.slope_at_alpha),
            "slope_kind": self.slope_kind,
            "c1_at_junctions": self.c1_at_junctions,
            "tail_left": _tail_dict(self.left_tail),
            "tail_right": _tail_dict(self.right_tail),
            "capped_quadrature_pieces": self.capped_pieces,
        }


def _tail_dict(t: TailInfo) -> dict:
    return {"end": t.end, "sharp": t.sharp, "D_end": t.d_end, "decade_ratio": t.ratio,
            "rate": t.rate if math.isfinite(t.rate) else None, "eta_last": t.eta_last,
            "reached_tail_tol": t.reached}


# -- branch engine -----------------------------------------------------------

def _context(spec: WaveSpec, diff=None, force_python=False) -> KernelContext:
    anchors = [spec.l_minus, *spec.zeros, spec.l_plus]
    return KernelContext(spec.flux, diff if diff is not None else spec.diffusivity,
                         spec.c, tuple(float(a) for a in anchors), force_python=force_python)


def _gk(ctx, a, b):
    v, _, capped = ctx.gk_integrate(np.asarray(a, dtype=float), np.asarray(b, dtype=float),
                                    QUAD_RTOL, QUAD_ATOL)
    return np.asarray(v), capped


def _signed_integrals(ctx, pts):
    """``int_{pts[0]}^{pts[k]} D/F`` for a monotone sequence ``pts``."""
    a = np.minimum(pts[:-1], pts[1:])
    b = np.maximum(pts[:-1], pts[1:])
    v, capped = _gk(ctx, a, b)
    step = np.where(pts[1:] > pts[:-1], v, -v)
    return np.concatenate([[0.0], np.cumsum(step)]), capped


def probe_tail(ctx, node: float, end: float, decades=range(3, 10)) -> Tuple[bool, float]:
    """Ratio of successive per-decade increments of ``int D/F`` toward ``end``.

    Bounded integrands give ratios near 0.1 (finite contact); logarithmic
    or worse divergence gives ratios near 1 or above.
    """
    L = end - node
    ks = np.asarray(list(decades), dtype=float)
    pts = end - L * 10.0 ** (-ks)
    I, _ = _signed_integrals(ctx, pts)
    inc = np.abs(np.diff(I))
    ratio = float(inc[-1] / inc[-2]) if inc[-2] > 0 else 0.0
    return ratio < 0.5, ratio


def _branch_grid(node, end, reachable, n, tail_tol, node_gap=NODE_GAP):
    L = abs(end - node)
    near_node = np.geomspace(node_gap, 0.1, 33)
    lin = np.linspace(0.0, 1.0, n + 1)
    if reachable:
        near_end = 1.0 - np.geomspace(1e-12, 0.1, 45)
        t = np.concatenate([[0.0], near_node, lin, near_end, [1.0]])
    else:
        t_last = 1.0 - tail_tol / L
        near_end = 1.0 - np.geomspace(tail_tol / L, 0.1, 8 * max(1, int(math.ceil(math.log10(0.1 * L / tail_tol)))) + 1)
        t = np.concatenate([[0.0], near_node, lin[lin < t_last], near_end])
    t = np.unique(np.clip(t, 0.0, 1.0))
    return node + t * (end - node)


def build_branch(ctx, node: float, end: float, *, end_is_zero: bool = False, n: int = 400,
                 tail_tol: float = TAIL_TOL, xi_horizon: float = XI_HORIZON,
                 node_gap: float = NODE_GAP) -> Branch:
    """Sample ``I(phi) = int_node^phi D/F`` from ``node`` toward ``end``."""
    _, _, Dend, _ = ctx.eval_models(np.array([end]))
    d_end = float(Dend[0])
    if end_is_zero:
        sharp, ratio = True, 0.0
    else:
        sharp, ratio = probe_tail(ctx, node, end)
    pts = _branch_grid(node, end, sharp, n, tail_tol, node_gap)
    I, capped = _signed_integrals(ctx, pts)
    reached = True
    if not sharp and np.any(np.abs(I) > xi_horizon):
        k = int(np.argmax(np.abs(I) > xi_horizon))
        pts, I = pts[: k + 1], I[: k + 1]
        reached = False
    if not np.all(np.isfinite(I)):
        raise QuadratureDivergence(f"non-finite quadrature on the branch {node} -> {end}")
    rate = float("nan")
    eta_last = abs(end - pts[-1])
    if not sharp:
        e1, e2 = abs(end - pts[-2]), abs(end - pts[-1])
        dI = abs(I[-1] - I[-2])
        rate = math.log(e1 / e2) / dI if dI > 0 else float("nan")
    tail = TailInfo(float(end), bool(sharp), d_end, ratio, rate, eta_last, reached)
    return Branch(float(node), float(end), ctx, pts, I, tail, 1.0, capped)


# -- slope at a zero of D ----------------------------------------------------

def slope_at_zero(spec: WaveSpec, z: float, diff=None, increasing=None) -> dict:
    """One-sided limit of ``F/D`` at a zero ``z`` of ``D``.

    ``F'(z)/D'(z)`` when ``D'(z) != 0``; infinite when only ``D'`` vanishes;
    otherwise a numerical estimate flagged ``indeterminate``.
    """
    D = diff if diff is not None else spec.diffusivity
    inc = spec.increasing if increasing is None else increasing
    dF = float(spec.flux.deriv(z)) - spec.c
    dD = float(D.deriv(z))
    lo, hi = spec.l_minus, spec.l_plus
    dscale = float(np.max(np.abs(D.eval(np.linspace(lo, hi, 257)))))
    if abs(dD) > 1e-12 * max(dscale, np.finfo(float).tiny):
        return {"kind": "finite", "value": dF / dD, "dF": dF, "dD": dD}
    if abs(dF) > 1e-12:
        return {"kind": "infinite", "value": math.inf if inc else -math.inf, "dF": dF, "dD": dD}
    est = []
    for eta in (1e-3, 1e-4, 1e-5):
        r = z + eta
        est.append(float(spec.F(r)) / float(D.eval(r)))
    return {"kind": "indeterminate", "value": est[-1], "estimates": est, "dF": dF, "dD": dD}


# -- public constructors -----------------------------------------------------

def _check_grid(prof: Profile, phi_grid):
    if phi_grid is None:
        return
    xs = prof.xi_at(np.asarray(phi_grid, dtype=float))
    if np.any(np.abs(xs) > XI_HORIZON):
        raise QuadratureDivergence("requested samples lie beyond the xi horizon")


def xi_of_phi(spec: WaveSpec, phi_grid=None, *, n: int = 400, tail_tol: float = TAIL_TOL,
              xi_horizon: float = XI_HORIZON, diff=None, force_python: bool = False) -> Profile:
    """Profile of an accepted spec by quadrature of ``D/F`` in ``phi``.

    D1 and reversed fronts are anchored at their zero of ``D``; constant-sign
    fronts at the midpoint of ``(l_minus, l_plus)``. ``phi_grid``, when
    given, is evaluated exactly and must avoid asymptotic end states.
    """
    if spec.regime is Regime.D2_FRONT:
        return profile_D2(spec, n=n, tail_tol=tail_tol, diff=diff, force_python=force_python)
    ctx = _context(spec, diff, force_python)
    lm, lp = spec.l_minus, spec.l_plus
    if spec.regime is Regime.CONST_SIGN:
        z = 0.5 * (lm + lp)
        slope = {}
    else:
        z = spec.zeros[0]
        slope = slope_at_zero(spec, z, diff)
    first_end, second_end = (lm, lp) if spec.increasing else (lp, lm)
    kw = dict(n=n, tail_tol=tail_tol, xi_horizon=xi_horizon)
    b1 = build_branch(ctx, z, first_end, **kw)
    b2 = build_branch(ctx, z, second_end, **kw)
    prof = Profile(spec, [b1, b2], ("alpha",), slope)
    _check_grid(prof, phi_grid)
    return prof


def decreasing_front(spec: WaveSpec, **kw) -> Profile:
    """Decreasing profile for a negative-then-positive ``D`` around ``beta``:
    the constant-sign pieces b1 (left of ``beta``) and a2 (right of it) joined
    at ``beta``."""
    if spec.regime is not Regime.REVERSED_D1_FRONT:
        raise ValueError("decreasing_front needs a ReversedD1Front spec")
    return xi_of_phi(spec, **kw)


def insert_plateau(p: Profile, xi1: float) -> Profile:
    """Hold ``phi`` at the first zero of ``D`` on ``[0, xi1]``."""
    if xi1 < 0:
        raise NegativeXi1("xi1 must be non-negative")
    rest = p.segments[1:]
    if rest and isinstance(rest[0], Plateau):
        if rest[0].length > 0:
            raise ValueError("profile already has a plateau at its anchor")
        rest = rest[1:]
    if xi1 == 0:
        return p
    segs = [p.segments[0], Plateau(p.segments[0].node, float(xi1))] + rest
    return Profile(p.spec, segs, p.zero_labels, p.slope, p.scale, p.n_plateau)


def profile_D2(spec: WaveSpec, xi1: float = 0.0, xi2: Optional[float] = None,
               xi3: Optional[float] = None, *, n: int = 400, tail_tol: float = TAIL_TOL,
               diff=None, force_python: bool = False, consistency_tol: float = 1e-8) -> Profile:
    """Three-piece D2 profile with optional plateaus at ``alpha`` and ``beta``.

    The middle piece fixes ``xi2 - xi1 = int_alpha^beta D/F``; a supplied
    ``xi2`` must agree with it.
    """
    if spec.regime is not Regime.D2_FRONT:
        raise ValueError("profile_D2 needs a D2Front spec")
    if xi1 < 0:
        raise NegativeXi1("xi1 must be non-negative")
    ctx = _context(spec, diff, force_python)
    alpha, beta = spec.zeros
    kw = dict(n=n, tail_tol=tail_tol)
    left = build_branch(ctx, alpha, spec.l_minus, **kw)
    mid = build_branch(ctx, alpha, beta, end_is_zero=True, **kw)
    right = build_branch(ctx, beta, spec.l_plus, **kw)
    span = float(mid.I[-1])
    if xi2 is None:
        xi2 = xi1 + span
    elif abs(xi2 - (xi1 + span)) > consistency_tol * max(1.0, abs(xi2)):
        raise ValueError(f"xi2={xi2} inconsistent: the piece from alpha to beta has length {span!r}")
    xi3 = xi2 if xi3 is None else xi3
    if xi3 < xi2:
        raise ValueError("need xi3 >= xi2")
    segs = [left, Plateau(alpha, float(xi1)), mid, Plateau(beta, float(xi3 - xi2)), right]
    slope = slope_at_zero(spec, alpha, diff)
    prof = Profile(spec, segs, ("alpha", "beta"), slope)
    prof.slope_beta = slope_at_zero(spec, beta, diff)
    return prof


# -- ODE oracle --------------------------------------------------------------

@dataclass
class OdeProfile:
    xi: np.ndarray
    phi: np.ndarray
    status_left: int
    status_right: int
    seed: float

    def deviation(self, prof: Profile, mask_tail: float = 0.0) -> float:
        """Sup of ``|xi_ode(phi) - xi_quad(phi)|`` over the ODE samples."""
        lm, lp = prof.spec.l_minus, prof.spec.l_plus
        keep = (self.phi > lm + mask_tail) & (self.phi < lp - mask_tail)
        ph = self.phi[keep]
        xq = prof.xi_at(ph)
        return float(np.max(np.abs(self.xi[keep] - xq)))


def ode_oracle(spec: WaveSpec, *, seed: float = 1e-7, rtol: float = 1e-12, atol: float = 1e-16,
               tail_tol: float = TAIL_TOL, xi_max: float = XI_HORIZON, diff=None,
               force_python: bool = False) -> OdeProfile:
    """Shoot ``phi' = F/D`` outward from ``alpha -/+ seed`` (D1 fronts, ``D'(alpha) < 0``)."""
    if spec.regime is not Regime.D1_FRONT:
        raise ValueError("the ODE oracle handles D1 fronts")
    D = diff if diff is not None else spec.diffusivity
    alpha = spec.alpha
    sl = slope_at_zero(spec, alpha, D)
    if sl["kind"] != "finite" or not sl["dD"] < 0:
        raise ValueError("the ODE oracle needs D'(alpha) < 0")
    s = sl["value"]
    if not s > 0:
        raise ValueError("zero slope at alpha: shooting from alpha is degenerate")
    ctx = _context(spec, D, force_python)
    lm, lp = spec.l_minus, spec.l_plus
    kw = dict(rtol=rtol, atol=atol, tail_tol=tail_tol, xi_max=xi_max)
    xr, yr, st_r = ctx.dopri5(seed / s, alpha + seed, 1, alpha, lp, lp, **kw)
    xl, yl, st_l = ctx.dopri5(-seed / s, alpha - seed, -1, lm, alpha, lm, **kw)
    for st, x, y in ((st_r, xr, yr), (st_l, xl, yl)):
        if st == STATUS_UNDERFLOW:
            raise StiffnessFailure(f"step size underflow at xi={x[-1]:.6g}, phi={y[-1]:.12g}",
                                   float(x[-1]), float(y[-1]))
    xi = np.concatenate([xl[::-1], [0.0], xr])
    phi = np.concatenate([yl[::-1], [alpha], yr])
    return OdeProfile(xi, phi, int(st_l), int(st_r), seed)


def reverse_check(spec: WaveSpec, prof: Profile, *, start_eta: float = 1e-4, rtol: float = 1e-12,
                  atol: float = 1e-16, diff=None) -> float:
    """Integrate back toward ``alpha`` from points near both ends; return the
    sup deviation from the quadrature profile."""
    D = diff if diff is not None else spec.diffusivity
    ctx = _context(spec, D)
    alpha, lm, lp = spec.alpha, spec.l_minus, spec.l_plus
    dev = 0.0
    for end, direction in ((lp, -1), (lm, 1)):
        p0 = end - math.copysign(start_eta * abs(end - alpha), end - alpha)
        x0 = prof.xi_at(p0)
        lo, hi = sorted((alpha, end))
        x, y, st = ctx.dopri5(x0, p0, direction, lo, hi, alpha, rtol=rtol, atol=atol,
                              tail_tol=1e-6 * abs(end - alpha))
        dev = max(dev, float(np.max(np.abs(x - prof.xi_at(y)))))
    return dev
