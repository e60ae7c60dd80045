"""Velocity laws, fluxes and diffusivities for collective-movement models.

Everything here works on the normalized density ``rho`` in ``[0, 1]``.
Packaged families carry analytic first and second derivatives; finite
differences are only used by :func:`validate_derivatives`.

The packaged velocity laws are

=============  ==========================================================
Linear         ``vbar * (1 - rho)``
Quadratic      ``vbar * (1 - rho)**2``
PowerPQ        ``vbar * (1 - rho**p)**q``
Kladek         ``vbar * (1 - exp(gamma * (1 - 1/rho)))``
ExponentialA   ``vbar`` for ``rho <= a``, ``vbar * exp(gamma*(a-rho)/(1-rho))``
LogLaw         ``vbar * min(1, -c*log(rho))``
=============  ==========================================================

and the diffusivities built from a law ``v`` (with ``g = rho * v'``) are

===============  ==================================================
NelsonDeltaTau   ``-g * (delta + tau*g)``
DeltaOnly        ``-delta * g``
HvSquared        ``-g * (h*v**2 + tau*g)``
Hv               ``-g * (h*v + tau*g)``
KineticTwoSpeed  ``tau * (v + g) * (vbar - v - g)``
===============  ==================================================
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np

from fbwave.errors import NonPositiveParam

ArrayFunc = Callable[[np.ndarray], np.ndarray]


class VelocityKind(str, enum.Enum):
    LINEAR = "Linear"
    QUADRATIC = "Quadratic"
    POWER_PQ = "PowerPQ"
    KLADEK = "Kladek"
    EXPONENTIAL_A = "ExponentialA"
    LOG_LAW = "LogLaw"
    CUSTOM = "Custom"


class DiffusivityKind(str, enum.Enum):
    NELSON_DELTA_TAU = "NelsonDeltaTau"
    DELTA_ONLY = "DeltaOnly"
    HV_SQUARED = "HvSquared"
    HV = "Hv"
    KINETIC_TWO_SPEED = "KineticTwoSpeed"
    DIRECT = "Direct"


# integer codes shared with the compiled kernels
VELOCITY_CODES = {
    VelocityKind.LINEAR: 0,
    VelocityKind.QUADRATIC: 1,
    VelocityKind.POWER_PQ: 2,
    VelocityKind.KLADEK: 3,
    VelocityKind.EXPONENTIAL_A: 4,
    VelocityKind.LOG_LAW: 5,
}
DIFFUSIVITY_CODES = {
    DiffusivityKind.NELSON_DELTA_TAU: 0,
    DiffusivityKind.DELTA_ONLY: 1,
    DiffusivityKind.HV_SQUARED: 2,
    DiffusivityKind.HV: 3,
    DiffusivityKind.KINETIC_TWO_SPEED: 4,
}

_VELOCITY_DEFAULTS = {"vbar": 1.0, "gamma": 1.0, "a": 0.0, "p": 1.0, "q": 2.0, "c": 1.0}
_VELOCITY_PARAM_ORDER = ("vbar", "gamma", "a", "p", "q", "c")
_DIFFUSIVITY_PARAM_ORDER = ("delta", "tau", "h", "vbar")


def _asarray(rho):
    return np.asarray(rho, dtype=float)


def _packaged_velocity(kind: VelocityKind, prm: Mapping[str, float], rho: np.ndarray):
    """Return ``(v, v', v'')`` for a packaged law on an array of densities."""
    vb = prm["vbar"]
    r = rho
    zero = np.zeros_like(r)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind is VelocityKind.LINEAR:
            return vb * (1.0 - r), zero - vb, zero
        if kind is VelocityKind.QUADRATIC:
            return vb * (1.0 - r) ** 2, -2.0 * vb * (1.0 - r), zero + 2.0 * vb
        if kind is VelocityKind.POWER_PQ:
            p, q = prm["p"], prm["q"]
            u = 1.0 - r**p
            v = vb * u**q
            dv = -vb * q * p * r ** (p - 1.0) * u ** (q - 1.0)
            d2v = vb * q * p * (
                (q - 1.0) * p * r ** (2.0 * p - 2.0) * u ** (q - 2.0)
                - (p - 1.0) * r ** (p - 2.0) * u ** (q - 1.0)
            )
            if p >= 1.0:
                dv = np.where(r == 0.0, -vb * q * (p == 1.0), dv)
            return v, dv, np.nan_to_num(d2v, nan=0.0, posinf=np.inf, neginf=-np.inf)
        if kind is VelocityKind.KLADEK:
            gam = prm["gamma"]
            pos = r > 0.0
            rs = np.where(pos, r, 1.0)
            e = np.where(pos, np.exp(gam * (1.0 - 1.0 / rs)), 0.0)
            v = vb * (1.0 - e)
            dv = np.where(pos, -vb * e * gam / rs**2, 0.0)
            d2v = np.where(pos, -vb * gam * e * (gam / rs**4 - 2.0 / rs**3), 0.0)
            return v, dv, d2v
        if kind is VelocityKind.EXPONENTIAL_A:
            gam, a = prm["gamma"], prm["a"]
            # the right branch is used at rho == a when a > 0 (restricted domain)
            right = (r >= a) if a > 0.0 else np.ones_like(r, dtype=bool)
            inner = right & (r < 1.0)
            rs = np.where(inner, r, 0.5 * (1.0 + a))
            g = (a - rs) / (1.0 - rs)
            g1 = (a - 1.0) / (1.0 - rs) ** 2
            g2 = 2.0 * (a - 1.0) / (1.0 - rs) ** 3
            e = np.exp(gam * g)
            v = np.where(inner, vb * e, np.where(right, 0.0, vb))
            dv = np.where(inner, vb * e * gam * g1, 0.0)
            d2v = np.where(inner, vb * e * (gam**2 * g1**2 + gam * g2), 0.0)
            return v, dv, d2v
        if kind is VelocityKind.LOG_LAW:
            c = prm["c"]
            kink = math.exp(-1.0 / c)
            right = r >= kink
            rs = np.where(right, r, 1.0)
            v = np.where(right, -vb * c * np.log(rs), vb)
            dv = np.where(right, -vb * c / rs, 0.0)
            d2v = np.where(right, vb * c / rs**2, 0.0)
            return v, dv, d2v
    raise ValueError(f"not a packaged velocity law: {kind}")


@dataclass(frozen=True)
class VelocityLaw:
    """Speed-density law ``v(rho)`` on ``[0, 1]``.

    ``domain`` is the closed interval on which the law is C^1; outside
    packaged families it is ``(0, 1)``. ``non_c1`` lists interior points
    where the derivative jumps.
    """

    kind: VelocityKind
    params: Tuple[Tuple[str, float], ...] = ()
    name: str = ""
    _v: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _dv: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _d2v: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _domain: Tuple[float, float] = (0.0, 1.0)

    # constructors -------------------------------------------------------
    @classmethod
    def packaged(cls, kind, **params) -> "VelocityLaw":
        kind = VelocityKind(kind)
        if kind is VelocityKind.CUSTOM:
            raise ValueError("use VelocityLaw.custom for user-supplied laws")
        prm = dict(_VELOCITY_DEFAULTS)
        unknown = set(params) - set(prm)
        if unknown:
            raise ValueError(f"unknown velocity parameters: {sorted(unknown)}")
        prm.update({k: float(v) for k, v in params.items()})
        if prm["vbar"] <= 0:
            raise NonPositiveParam("vbar must be positive")
        if kind in (VelocityKind.KLADEK, VelocityKind.EXPONENTIAL_A) and prm["gamma"] <= 0:
            raise NonPositiveParam("gamma must be positive")
        if kind is VelocityKind.EXPONENTIAL_A and not 0.0 <= prm["a"] < 1.0:
            raise ValueError("critical density a must lie in [0, 1)")
        if kind is VelocityKind.POWER_PQ:
            if prm["p"] <= 0:
                raise NonPositiveParam("p must be positive")
            if prm["q"] <= 1:
                raise NonPositiveParam("q must exceed 1")
        if kind is VelocityKind.LOG_LAW and prm["c"] <= 0:
            raise NonPositiveParam("c must be positive")
        used = {
            VelocityKind.LINEAR: ("vbar",),
            VelocityKind.QUADRATIC: ("vbar",),
            VelocityKind.POWER_PQ: ("vbar", "p", "q"),
            VelocityKind.KLADEK: ("vbar", "gamma"),
            VelocityKind.EXPONENTIAL_A: ("vbar", "gamma", "a"),
            VelocityKind.LOG_LAW: ("vbar", "c"),
        }[kind]
        domain = (0.0, 1.0)
        if kind is VelocityKind.EXPONENTIAL_A and prm["a"] > 0:
            domain = (prm["a"], 1.0)
        elif kind is VelocityKind.LOG_LAW:
            domain = (math.exp(-1.0 / prm["c"]), 1.0)
        return cls(kind, tuple((k, prm[k]) for k in used), _domain=domain)

    @classmethod
    def linear(cls, vbar=1.0):
        return cls.packaged(VelocityKind.LINEAR, vbar=vbar)

    @classmethod
    def quadratic(cls, vbar=1.0):
        return cls.packaged(VelocityKind.QUADRATIC, vbar=vbar)

    @classmethod
    def power_pq(cls, p, q, vbar=1.0):
        return cls.packaged(VelocityKind.POWER_PQ, vbar=vbar, p=p, q=q)

    @classmethod
    def kladek(cls, gamma, vbar=1.0):
        return cls.packaged(VelocityKind.KLADEK, vbar=vbar, gamma=gamma)

    @classmethod
    def exponential(cls, gamma, a=0.0, vbar=1.0):
        return cls.packaged(VelocityKind.EXPONENTIAL_A, vbar=vbar, gamma=gamma, a=a)

    @classmethod
    def log_law(cls, c, vbar=1.0):
        return cls.packaged(VelocityKind.LOG_LAW, vbar=vbar, c=c)

    @classmethod
    def custom(cls, v, dv, d2v=None, *, vbar=None, domain=(0.0, 1.0), name="custom"):
        """Wrap user callables. ``d2v`` defaults to a central difference of ``dv``."""
        if vbar is None:
            grid = np.linspace(domain[0], domain[1], 2049)
            vbar = float(np.max(np.asarray(v(grid), dtype=float)))
        return cls(
            VelocityKind.CUSTOM,
            (("vbar", float(vbar)),),
            name=name,
            _v=v,
            _dv=dv,
            _d2v=d2v,
            _domain=(float(domain[0]), float(domain[1])),
        )

    # properties ---------------------------------------------------------
    @property
    def param_dict(self):
        prm = dict(_VELOCITY_DEFAULTS)
        prm.update(self.params)
        return prm

    @property
    def vbar(self) -> float:
        return self.param_dict["vbar"]

    @property
    def domain(self) -> Tuple[float, float]:
        return self._domain

    @property
    def non_c1(self) -> Tuple[float, ...]:
        prm = self.param_dict
        if self.kind is VelocityKind.EXPONENTIAL_A and prm["a"] > 0:
            return (prm["a"],)
        if self.kind is VelocityKind.LOG_LAW:
            return (math.exp(-1.0 / prm["c"]),)
        if self.kind is VelocityKind.POWER_PQ and prm["p"] < 1:
            return (0.0,)
        return ()

    @property
    def restricted(self) -> bool:
        """True when the law is C^1 only on a sub-interval of ``[0, 1]``."""
        return self.domain != (0.0, 1.0)

    @property
    def is_packaged(self) -> bool:
        return self.kind is not VelocityKind.CUSTOM

    def kernel_params(self):
        """``(code, params)`` for the compiled kernels, or None for custom laws."""
        if not self.is_packaged:
            return None
        prm = self.param_dict
        return VELOCITY_CODES[self.kind], tuple(prm[k] for k in _VELOCITY_PARAM_ORDER)

    # evaluation ---------------------------------------------------------
    def _all(self, rho):
        r = _asarray(rho)
        if self.is_packaged:
            return _packaged_velocity(self.kind, self.param_dict, r)
        v = np.asarray(self._v(r), dtype=float)
        dv = np.asarray(self._dv(r), dtype=float)
        if self._d2v is not None:
            d2v = np.asarray(self._d2v(r), dtype=float)
        else:
            h = 1e-6
            d2v = (np.asarray(self._dv(r + h), float) - np.asarray(self._dv(r - h), float)) / (2 * h)
        return v, dv, d2v

    def eval(self, rho):
        return self._all(rho)[0]

    def deriv(self, rho):
        return self._all(rho)[1]

    def deriv2(self, rho):
        return self._all(rho)[2]

    __call__ = eval

    def to_dict(self) -> dict:
        if not self.is_packaged:
            raise ValueError("custom velocity laws are not serializable")
        return {"kind": self.kind.value, **dict(self.params)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "VelocityLaw":
        data = dict(data)
        kind = data.pop("kind")
        return cls.packaged(kind, **data)


@dataclass(frozen=True)
class FluxModel:
    """Flux ``f`` on ``[0, 1]``; built from a velocity law as ``rho * v`` or given directly."""

    velocity: Optional[VelocityLaw] = None
    _f: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _df: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _d2f: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _domain: Tuple[float, float] = (0.0, 1.0)
    coeffs: Optional[Tuple[float, ...]] = None

    @classmethod
    def direct(cls, f, df, d2f=None, domain=(0.0, 1.0)):
        return cls(None, f, df, d2f, (float(domain[0]), float(domain[1])))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]):
        """Polynomial flux, coefficients in ascending powers of ``rho``."""
        p = np.polynomial.Polynomial(coeffs)
        dp, d2p = p.deriv(), p.deriv(2)
        return cls(None, p, dp, d2p, (0.0, 1.0), tuple(float(c) for c in coeffs))

    @property
    def domain(self):
        return self.velocity.domain if self.velocity is not None else self._domain

    @property
    def non_c1(self):
        return self.velocity.non_c1 if self.velocity is not None else ()

    @property
    def vbar(self) -> float:
        return self.velocity.vbar if self.velocity is not None else 1.0

    def kernel_params(self):
        if self.velocity is None:
            return None
        return self.velocity.kernel_params()

    def _all(self, rho):
        r = _asarray(rho)
        if self.velocity is not None:
            v, dv, d2v = self.velocity._all(r)
            return r * v, v + r * dv, 2.0 * dv + r * d2v
        f = np.asarray(self._f(r), dtype=float)
        df = np.asarray(self._df(r), dtype=float)
        if self._d2f is not None:
            d2f = np.asarray(self._d2f(r), dtype=float)
        else:
            h = 1e-6
            d2f = (np.asarray(self._df(r + h), float) - np.asarray(self._df(r - h), float)) / (2 * h)
        return f, df, d2f

    def eval(self, rho):
        return self._all(rho)[0]

    def deriv(self, rho):
        return self._all(rho)[1]

    def deriv2(self, rho):
        return self._all(rho)[2]

    __call__ = eval


def build_flux(v: VelocityLaw) -> FluxModel:
    """Flux ``f(rho) = rho * v(rho)`` of a velocity law."""
    return FluxModel(velocity=v)


def _packaged_diffusivity(kind, prm, v, dv, d2v, rho):
    r = rho
    g = r * dv
    g1 = dv + r * d2v
    delta, tau, h = prm["delta"], prm["tau"], prm["h"]
    if kind is DiffusivityKind.NELSON_DELTA_TAU:
        return -g * (delta + tau * g), -g1 * (delta + 2.0 * tau * g)
    if kind is DiffusivityKind.DELTA_ONLY:
        return -delta * g, -delta * g1
    if kind is DiffusivityKind.HV_SQUARED:
        w = h * v * v + tau * g
        return -g * w, -g1 * w - g * (2.0 * h * v * dv + tau * g1)
    if kind is DiffusivityKind.HV:
        w = h * v + tau * g
        return -g * w, -g1 * w - g * (h * dv + tau * g1)
    if kind is DiffusivityKind.KINETIC_TWO_SPEED:
        vb = prm["vbar"]
        fp = v + g
        fpp = 2.0 * dv + r * d2v
        return tau * fp * (vb - fp), tau * fpp * (vb - 2.0 * fp)
    raise ValueError(f"not a packaged diffusivity: {kind}")


_REQUIRED = {
    DiffusivityKind.NELSON_DELTA_TAU: {"delta": "pos", "tau": "pos"},
    DiffusivityKind.DELTA_ONLY: {"delta": "pos"},
    DiffusivityKind.HV_SQUARED: {"h": "pos", "tau": "nonneg"},
    DiffusivityKind.HV: {"h": "pos", "tau": "nonneg"},
    DiffusivityKind.KINETIC_TWO_SPEED: {"tau": "pos"},
}


@dataclass(frozen=True)
class DiffusivityModel:
    """Diffusivity ``D`` on ``[0, 1]`` with analytic derivative."""

    kind: DiffusivityKind
    velocity: Optional[VelocityLaw] = None
    params: Tuple[Tuple[str, float], ...] = ()
    scale: float = 1.0
    _D: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _dD: Optional[ArrayFunc] = field(default=None, repr=False, compare=False)
    _domain: Tuple[float, float] = (0.0, 1.0)
    coeffs: Optional[Tuple[float, ...]] = None

    @classmethod
    def direct(cls, D, dD, domain=(0.0, 1.0)):
        return cls(DiffusivityKind.DIRECT, None, (), 1.0, D, dD, (float(domain[0]), float(domain[1])))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]):
        p = np.polynomial.Polynomial(coeffs)
        return cls(DiffusivityKind.DIRECT, None, (), 1.0, p, p.deriv(), (0.0, 1.0),
                   tuple(float(c) for c in coeffs))

    @property
    def param_dict(self):
        prm = {"delta": 0.0, "tau": 0.0, "h": 0.0, "vbar": 1.0}
        prm.update(self.params)
        return prm

    @property
    def domain(self):
        return self.velocity.domain if self.velocity is not None else self._domain

    @property
    def non_c1(self):
        return self.velocity.non_c1 if self.velocity is not None else ()

    def scaled(self, eps: float) -> "DiffusivityModel":
        """The model for ``eps * D``."""
        if eps <= 0:
            raise NonPositiveParam("scale must be positive")
        return DiffusivityModel(self.kind, self.velocity, self.params, self.scale * eps,
                                self._D, self._dD, self._domain, self.coeffs)

    def kernel_params(self):
        if self.kind is DiffusivityKind.DIRECT or not self.velocity.is_packaged:
            return None
        prm = self.param_dict
        vcode, vparams = self.velocity.kernel_params()
        return (DIFFUSIVITY_CODES[self.kind], tuple(prm[k] for k in _DIFFUSIVITY_PARAM_ORDER),
                vcode, vparams, self.scale)

    def _both(self, rho):
        r = _asarray(rho)
        if self.kind is DiffusivityKind.DIRECT:
            D = np.asarray(self._D(r), dtype=float)
            dD = np.asarray(self._dD(r), dtype=float)
        else:
            v, dv, d2v = self.velocity._all(r)
            D, dD = _packaged_diffusivity(self.kind, self.param_dict, v, dv, d2v, r)
        if self.scale != 1.0:
            return self.scale * D, self.scale * dD
        return D, dD

    def eval(self, rho):
        return self._both(rho)[0]

    def deriv(self, rho):
        return self._both(rho)[1]

    __call__ = eval

    def _rounding(self, rho):
        """Absolute rounding level of ``D``: the size of the terms that cancel."""
        r = _asarray(rho)
        eps = np.finfo(float).eps
        if self.kind is DiffusivityKind.DIRECT:
            if self.coeffs is None:
                return eps * np.abs(self.eval(r))
            terms = np.polynomial.polynomial.polyval(np.abs(r), np.abs(self.coeffs))
            return 2.0 * len(self.coeffs) * eps * abs(self.scale) * terms
        v, dv, _ = self.velocity._all(r)
        g = np.abs(r * dv)
        prm = self.param_dict
        delta, tau, h, vb = prm["delta"], prm["tau"], prm["h"], prm["vbar"]
        if self.kind is DiffusivityKind.NELSON_DELTA_TAU:
            size = g * (delta + tau * g)
        elif self.kind is DiffusivityKind.DELTA_ONLY:
            size = delta * g
        elif self.kind is DiffusivityKind.HV_SQUARED:
            size = g * (h * v * v + tau * g)
        elif self.kind is DiffusivityKind.HV:
            size = g * (h * np.abs(v) + tau * g)
        else:
            fp = np.abs(v + r * dv)
            size = tau * fp * (vb + fp)
        return 4.0 * eps * abs(self.scale) * size

    def safety_velocity(self) -> Optional[float]:
        """``delta / tau`` for the Nelson diffusivity, else None."""
        prm = self.param_dict
        if self.kind is DiffusivityKind.NELSON_DELTA_TAU:
            return prm["delta"] / prm["tau"]
        return None

    def safety_velocity_ok(self) -> Optional[bool]:
        """Whether ``vbar <= delta / tau`` holds; None when not applicable."""
        vs = self.safety_velocity()
        if vs is None:
            return None
        return self.velocity.vbar <= vs

    def to_dict(self) -> dict:
        if self.kind is DiffusivityKind.DIRECT:
            if self.coeffs is None:
                raise ValueError("direct diffusivity without coefficients is not serializable")
            return {"kind": "Direct", "poly": list(self.coeffs)}
        out = {"kind": self.kind.value}
        out.update({k: v for k, v in self.params if k != "vbar"})
        return out


def build_diffusivity(kind, v: Optional[VelocityLaw] = None, *, sigma=None, **params) -> DiffusivityModel:
    """Build a diffusivity of the given family from a velocity law.

    ``sigma`` is accepted for ``HvSquared`` with a quadratic law and sets
    ``tau = sigma * h * vbar / 2`` (``h`` defaults to 1), so that the
    interior zero solves ``(1 - alpha)**3 = sigma * alpha``.
    """
    kind = DiffusivityKind(kind)
    if kind is DiffusivityKind.DIRECT:
        raise ValueError("use DiffusivityModel.direct for a user-supplied diffusivity")
    if v is None:
        raise ValueError(f"{kind.value} needs a velocity law")
    prm = {k: float(x) for k, x in params.items()}
    unknown = set(prm) - {"delta", "tau", "h"}
    if unknown:
        raise ValueError(f"unknown diffusivity parameters: {sorted(unknown)}")
    if sigma is not None:
        if kind is not DiffusivityKind.HV_SQUARED or v.kind is not VelocityKind.QUADRATIC:
            raise ValueError("sigma applies to HvSquared with a quadratic velocity law")
        if sigma <= 0:
            raise NonPositiveParam("sigma must be positive")
        prm.setdefault("h", 1.0)
        prm["tau"] = sigma * prm["h"] * v.vbar / 2.0
    for name, rule in _REQUIRED[kind].items():
        if name not in prm:
            raise NonPositiveParam(f"{kind.value} requires parameter {name}")
        if rule == "pos" and prm[name] <= 0:
            raise NonPositiveParam(f"{name} must be positive for {kind.value}")
        if rule == "nonneg" and prm[name] < 0:
            raise NonPositiveParam(f"{name} must be non-negative for {kind.value}")
    keep = tuple((k, prm[k]) for k in ("delta", "tau", "h") if k in prm)
    if kind is DiffusivityKind.KINETIC_TWO_SPEED:
        keep = keep + (("vbar", v.vbar),)
    return DiffusivityModel(kind, v, keep)


def calibrate_tau(kind, v: VelocityLaw, alpha: float, **params) -> float:
    """Reaction time that puts the interior zero of ``D`` at ``alpha``.

    For the Nelson-type families ``D = -g * w`` with ``g = rho v'``; the zero
    at ``alpha`` comes from ``w(alpha) = 0``.
    """
    kind = DiffusivityKind(kind)
    va = float(v.eval(alpha))
    ga = alpha * float(v.deriv(alpha))
    if ga >= 0:
        raise ValueError("v must be strictly decreasing at alpha")
    if kind is DiffusivityKind.NELSON_DELTA_TAU:
        return -params["delta"] / ga
    if kind is DiffusivityKind.HV_SQUARED:
        return -params.get("h", 1.0) * va * va / ga
    if kind is DiffusivityKind.HV:
        return -params.get("h", 1.0) * va / ga
    raise ValueError(f"cannot calibrate tau for {kind.value}")


def diffusivity_from_dict(data: Mapping, v: Optional[VelocityLaw]) -> DiffusivityModel:
    data = dict(data)
    kind = DiffusivityKind(data.pop("kind"))
    if kind is DiffusivityKind.DIRECT:
        return DiffusivityModel.polynomial(data["poly"])
    alpha = data.pop("alpha", None)
    if alpha is not None:
        data["tau"] = calibrate_tau(kind, v, float(alpha), **data)
    return build_diffusivity(kind, v, **data)


@dataclass(frozen=True)
class DimensionalFrame:
    """Map between normalized density/speed and physical units."""

    rho_max: float
    v_max: float = 1.0
    density_unit: str = ""
    speed_unit: str = ""

    def __post_init__(self):
        if self.rho_max <= 0 or self.v_max <= 0:
            raise NonPositiveParam("rho_max and v_max must be positive")

    def to_dimensional(self, rho):
        return np.asarray(rho, dtype=float) * self.rho_max

    def to_normalized(self, rho_dim):
        return np.asarray(rho_dim, dtype=float) / self.rho_max

    def speed_to_dimensional(self, v):
        return np.asarray(v, dtype=float) * self.v_max

    def speed_to_normalized(self, v_dim):
        return np.asarray(v_dim, dtype=float) / self.v_max

    def flux_to_dimensional(self, f):
        return np.asarray(f, dtype=float) * self.rho_max * self.v_max


@dataclass
class DerivativeReport:
    passed: bool
    max_rel_dev: float
    worst_rho: float
    n_checked: int
    excluded: Tuple[float, ...] = ()

    def to_dict(self):
        return {"passed": self.passed, "max_rel_dev": self.max_rel_dev,
                "worst_rho": self.worst_rho, "n_checked": self.n_checked,
                "excluded": list(self.excluded)}


def validate_derivatives(model, n: int = 1000, tol: float = 1e-5) -> DerivativeReport:
    """Compare ``model.deriv`` against a five-point central difference of ``model.eval``.

    Interior grid points of the model's C^1 domain are used; points within
    two grid steps of a kink are skipped. Deviations are measured relative to
    ``max(|d|, |fd|)`` plus a floor of ``1e-6 * max|d|`` so that points where
    the derivative vanishes do not dominate.
    """
    lo, hi = model.domain
    grid = np.linspace(lo, hi, n + 2)[1:-1]
    step = (hi - lo) / (n + 1)
    kinks = tuple(k for k in model.non_c1 if lo <= k <= hi) + tuple(
        k for k in model.non_c1 if not lo <= k <= hi)
    keep = np.ones_like(grid, dtype=bool)
    for k in kinks:
        keep &= np.abs(grid - k) > 2.0 * step
    x = grid[keep]
    h = np.minimum(1e-3 * step * 10, 0.25 * np.minimum(x - lo, hi - x))
    h = np.maximum(h, 1e-7)
    fd = (-model.eval(x + 2 * h) + 8 * model.eval(x + h) - 8 * model.eval(x - h)
          + model.eval(x - 2 * h)) / (12 * h)
    d = model.deriv(x)
    floor = 1e-6 * float(np.max(np.abs(d))) if d.size else 0.0
    rel = np.abs(d - fd) / (np.maximum(np.abs(d), np.abs(fd)) + floor + 1e-300)
    i = int(np.argmax(rel)) if rel.size else 0
    worst = float(rel[i]) if rel.size else 0.0
    return DerivativeReport(bool(worst < tol), worst, float(x[i]) if rel.size else float("nan"),
                            int(x.size), kinks)
