"""Geometry of ``f`` and ``D``: sign patterns, chords, inflections, Lax flags."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from fbwave.errors import UnresolvedRoots

ROOT_XTOL = 1e-14
RESOLUTION = 1e-10


class PatternKind(str, enum.Enum):
    POSITIVE_INTERIOR = "PositiveInterior"
    NEGATIVE_INTERIOR = "NegativeInterior"
    D1 = "D1"
    D2 = "D2"
    REVERSED_D1 = "ReversedD1"
    OTHER = "Other"


@dataclass(frozen=True)
class Root:
    value: float
    residual: float
    tangent: bool = False


@dataclass
class SignPattern:
    """Roots of ``D`` on its domain with the signed intervals between them."""

    roots: List[Root]
    intervals: List[Tuple[float, float, int]]
    classification: PatternKind
    domain: Tuple[float, float]
    zero_at_lo: bool
    zero_at_hi: bool
    model: object = field(default=None, repr=False, compare=False)

    @property
    def crossing_roots(self) -> List[float]:
        return [r.value for r in self.roots if not r.tangent]

    @property
    def tangent_roots(self) -> List[float]:
        return [r.value for r in self.roots if r.tangent]

    @property
    def alpha(self) -> Optional[float]:
        if self.classification in (PatternKind.D1, PatternKind.D2):
            return self.crossing_roots[0]
        return None

    @property
    def beta(self) -> Optional[float]:
        if self.classification is PatternKind.D2:
            return self.crossing_roots[1]
        if self.classification is PatternKind.REVERSED_D1:
            return self.crossing_roots[0]
        return None

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "domain": list(self.domain),
            "roots": [{"value": r.value, "residual": r.residual, "tangent": r.tangent}
                      for r in self.roots],
            "intervals": [{"lo": lo, "hi": hi, "sign": "+" if s > 0 else "-"}
                          for lo, hi, s in self.intervals],
            "zero_at_lo": self.zero_at_lo,
            "zero_at_hi": self.zero_at_hi,
            "alpha": self.alpha,
            "beta": self.beta,
        }


def _classify(signs: Sequence[int]) -> PatternKind:
    key = tuple(signs)
    return {
        (1,): PatternKind.POSITIVE_INTERIOR,
        (-1,): PatternKind.NEGATIVE_INTERIOR,
        (1, -1): PatternKind.D1,
        (1, -1, 1): PatternKind.D2,
        (-1, 1): PatternKind.REVERSED_D1,
    }.get(key, PatternKind.OTHER)


def _crossings(func, x, y):
    """Sign changes of ``y`` refined by brentq, plus runs of exact zeros.

    Returns ``(crossings, flat)``: a run of exact zeros between opposite
    signs is one crossing, between equal signs one tangential zero; runs
    touching the ends (underflow) are attributed to the end.
    """
    out, flat = [], []
    s = np.sign(y)
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        out.append(brentq(func, x[i], x[i + 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
    zero = s == 0
    i = 0
    while i < s.size:
        if not zero[i]:
            i += 1
            continue
        j = i
        while j + 1 < s.size and zero[j + 1]:
            j += 1
        if i > 0 and j + 1 < s.size:
            if s[i - 1] * s[j + 1] < 0:
                out.append(float(x[i]) if i == j else
                           brentq(func, x[i - 1], x[j + 1], xtol=ROOT_XTOL))
            else:
                flat.append(float(x[(i + j) // 2]))
        i = j + 1
    return sorted(out), flat


def _interior_grid(lo, hi, n):
    return np.linspace(lo, hi, n + 1)[1:-1]


def sign_pattern(D, tol_root: float = 1e-10, n: int = 4096, domain=None,
                 max_refine: int = 6) -> SignPattern:
    """Locate the zeros of ``D`` on the open domain and classify the sign pattern.

    Sign changes on a uniform grid are refined by Brent's method; local
    minima of ``|D|`` without a sign change are minimized and reported as
    tangential roots when ``|D| <= tol_root * max|D|``. The grid is doubled
    until the number of sign changes is stable.
    """
    lo, hi = domain if domain is not None else D.domain

    def func(r):
        return float(D.eval(np.asarray(r, dtype=float)))

    prev = None
    for k in range(max_refine + 1):
        m = n * 2**k
        x = _interior_grid(lo, hi, m)
        y = np.asarray(D.eval(x), dtype=float)
        nz = y[y != 0]
        count = int(np.count_nonzero(np.sign(nz[:-1]) != np.sign(nz[1:]))) if nz.size else 0
        if prev is not None and count == prev:
            break
        prev = count
    else:
        raise UnresolvedRoots(f"sign changes of D not stable up to {m} grid cells")

    scale = float(np.max(np.abs(y))) if y.size else 0.0
    if scale == 0.0:
        return SignPattern([], [], PatternKind.OTHER, (lo, hi), True, True, D)
    crossings, flat = _crossings(func, x, y)
    if any(b - a < RESOLUTION for a, b in zip(crossings, crossings[1:])):
        raise UnresolvedRoots("roots of D closer than the resolution 1e-10")

    # tangential zeros: local minima of |D| not straddling a sign change
    tangents = []
    ay = np.abs(y)
    for i in range(1, y.size - 1):
        if ay[i] <= ay[i - 1] and ay[i] <= ay[i + 1] and y[i - 1] * y[i + 1] > 0 and y[i] != 0:
            res = minimize_scalar(lambda r: abs(func(r)), bounds=(x[i - 1], x[i + 1]),
                                  method="bounded", options={"xatol": 1e-13})
            if abs(func(res.x)) <= tol_root * scale and np.sign(func(res.x)) in (0, np.sign(y[i])):
                tangents.append(float(res.x))

    roots = [Root(r, abs(func(r)), False) for r in crossings]
    roots += [Root(r, abs(func(r)), True) for r in tangents + flat]
    roots.sort(key=lambda r: r.value)

    cuts = [lo] + crossings + [hi]
    intervals = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        inside = y[(x > a) & (x < b)]
        inside = inside[inside != 0]
        if inside.size == 0:
            sgn = int(np.sign(func(0.5 * (a + b))))
        else:
            sgn = int(np.sign(inside[np.argmax(np.abs(inside))]))
        intervals.append((a, b, sgn))
    for a, b, s in intervals:
        if s == 0:
            return SignPattern(roots, intervals, PatternKind.OTHER, (lo, hi),
                               abs(func(lo)) <= tol_root * scale, abs(func(hi)) <= tol_root * scale, D)
    kind = _classify([s for _, _, s in intervals])
    return SignPattern(
        roots, intervals, kind, (lo, hi),
        abs(func(lo)) <= tol_root * scale, abs(func(hi)) <= tol_root * scale, D,
    )


@dataclass(frozen=True)
class Chord:
    """Line through ``(a, f(a))`` and ``(b, f(b))``."""

    a: float
    b: float
    fa: float
    fb: float

    @classmethod
    def of(cls, f, a, b) -> "Chord":
        if not a < b:
            raise ValueError("chord needs a < b")
        fa, fb = (float(t) for t in f.eval(np.array([a, b], dtype=float)))
        return cls(float(a), float(b), fa, fb)

    @property
    def slope(self) -> float:
        return (self.fb - self.fa) / (self.b - self.a)

    def eval(self, rho):
        r = np.asarray(rho, dtype=float)
        # interpolate from the nearer end so s(a) and s(b) are exact
        t = (r - self.a) / (self.b - self.a)
        return np.where(t <= 0.5, self.fa + self.slope * (r - self.a), self.fb + self.slope * (r - self.b))

    __call__ = eval


def secant(f, a, b) -> float:
    fa, fb = (float(t) for t in f.eval(np.array([a, b], dtype=float)))
    return (fb - fa) / (b - a)


class ChordStatus(str, enum.Enum):
    HOLDS = "holds"
    DEGENERATE = "degenerate"
    FAILS = "fails"


@dataclass(frozen=True)
class SegmentMargin:
    a: float
    b: float
    side: str  # "above" or "below"
    margin: float
    status: ChordStatus
    argmin: float

    def to_dict(self):
        return {"a": self.a, "b": self.b, "side": self.side, "margin": self.margin,
                "status": self.status.value, "argmin": self.argmin}


@dataclass(frozen=True)
class ChordMargins:
    segments: Tuple[SegmentMargin, ...]
    strict_tol: float

    @property
    def margins(self) -> Tuple[float, ...]:
        return tuple(s.margin for s in self.segments)

    @property
    def holds(self) -> bool:
        return all(s.status is ChordStatus.HOLDS for s in self.segments)

    def failing(self) -> List[SegmentMargin]:
        return [s for s in self.segments if s.status is not ChordStatus.HOLDS]


def chord_conditions(f, l_minus, mids, l_plus, n: int = 20000, strict_tol: float = 1e-10,
                     first_side: str = "above") -> ChordMargins:
    """Signed margins of the alternating chord conditions.

    Segment ``k`` joins consecutive points of ``[l_minus, *mids, l_plus]``;
    the first must have ``f`` above its chord, the next below, and so on.
    The margin is ``min(f - s)`` (above) or ``min(s - f)`` (below) over
    ``n`` midpoints of the open segment, so that the endpoints are excluded
    by half a grid step. ``strict_tol`` is relative to ``max|f|`` on the
    points.
    """
    pts = [float(l_minus)] + [float(m) for m in mids] + [float(l_plus)]
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("chord points must be strictly increasing")
    sides = []
    side = first_side
    for _ in range(len(pts) - 1):
        sides.append(side)
        side = "below" if side == "above" else "above"
    grids = [a + (np.arange(n) + 0.5) * (b - a) / n for a, b in zip(pts, pts[1:])]
    fvals = [np.asarray(f.eval(g), dtype=float) for g in grids]
    fmax = max(float(np.max(np.abs(v))) for v in fvals)
    fmax = max(fmax, float(np.max(np.abs(f.eval(np.asarray(pts))))))
    tol = strict_tol * max(fmax, np.finfo(float).tiny)
    segs = []
    for (a, b), g, fv, sd in zip(zip(pts, pts[1:]), grids, fvals, sides):
        ch = Chord.of(f, a, b)
        d = fv - ch.eval(g)
        if sd == "below":
            d = -d
        i = int(np.argmin(d))
        m = float(d[i])
        status = ChordStatus.HOLDS if m > tol else (
            ChordStatus.DEGENERATE if m >= -tol else ChordStatus.FAILS)
        segs.append(SegmentMargin(a, b, sd, m, status, float(g[i])))
    return ChordMargins(tuple(segs), tol)


def inflection_points(f, n: int = 4096, domain=None) -> List[float]:
    """Sign changes of ``f''`` in the open domain, refined by Brent's method."""
    lo, hi = domain if domain is not None else f.domain
    x = _interior_grid(lo, hi, n)
    y = np.asarray(f.deriv2(x), dtype=float)
    y = np.where(np.isfinite(y), y, 0.0)
    s = np.sign(y)
    keep = np.flatnonzero(s != 0)
    out = []
    for i, j in zip(keep[:-1], keep[1:]):
        if s[i] * s[j] < 0:
            out.append(brentq(lambda r: float(f.deriv2(np.asarray(r))), x[i], x[j],
                              xtol=ROOT_XTOL))
    return out


@dataclass(frozen=True)
class LaxReport:
    df_minus: float
    df_plus: float
    c: float
    compressive_left: bool
    compressive_right: bool
    sonic_left: bool
    sonic_right: bool
    doubly_sonic: bool
    entropy_violated: bool
    chord_gap: float

    @property
    def lax_shock(self) -> bool:
        return self.compressive_left and self.compressive_right

    def to_dict(self):
        return dict(self.__dict__, lax_shock=self.lax_shock)


def classify_lax(f, l_minus, l_plus, c, sonic_tol: float = 1e-9, n: int = 20000) -> LaxReport:
    """Characteristic-speed flags for the jump ``l_minus -> l_plus`` at speed ``c``.

    ``entropy_violated`` uses the chord form of the Oleinik condition: for
    ``l_minus < l_plus`` the graph of ``f`` must stay above the chord, for
    ``l_minus > l_plus`` below it.
    """
    dm, dp = (float(t) for t in f.deriv(np.array([l_minus, l_plus], dtype=float)))
    sl = abs(dm - c) <= sonic_tol
    sr = abs(dp - c) <= sonic_tol
    a, b = min(l_minus, l_plus), max(l_minus, l_plus)
    g = a + (np.arange(n) + 0.5) * (b - a) / n
    d = np.asarray(f.eval(g), dtype=float) - Chord.of(f, a, b).eval(g)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(f.eval(g)))))
    if l_minus < l_plus:
        gap = float(np.min(d))
        violated = gap < -tol
    else:
        gap = float(-np.max(d))
        violated = gap < -tol
    return LaxReport(dm, dp, float(c), (dm - c) > sonic_tol, (c - dp) > sonic_tol,
                     sl, sr, sl and sr, violated, gap)
