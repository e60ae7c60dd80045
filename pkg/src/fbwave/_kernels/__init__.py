"""Hot kernels: the ``D/F`` integrand, adaptive Gauss-Kronrod and DOPRI5.

The compiled extension is used when it imports and the models can be
expressed by codes (packaged laws or polynomials). Set
``FBWAVE_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from fbwave._kernels import _pykernels

try:  # pragma: no cover - depends on build
    if os.environ.get("FBWAVE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure Python requested")
    from fbwave._kernels import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

BACKEND = _ckernels.NAME if _ckernels is not None else _pykernels.NAME

STATUS_TARGET = _pykernels.STATUS_TARGET
STATUS_HORIZON = _pykernels.STATUS_HORIZON
STATUS_UNDERFLOW = _pykernels.STATUS_UNDERFLOW
STATUS_MAXSTEPS = _pykernels.STATUS_MAXSTEPS


def compiled_available() -> bool:
    return _ckernels is not None


@dataclass(frozen=True, eq=False)
class KernelContext:
    """Flux, diffusivity, speed and chord anchors for one profile piece.

    ``F`` is evaluated as ``f(r) - f(p) - c (r - p)`` with ``p`` the anchor
    nearest to ``r``; on a collinear configuration all anchors give the
    same function up to rounding, and the nearest one cancels best.
    """

    flux: object
    diff: object
    c: float
    anchors: Tuple[float, ...]
    fanchors: Tuple[float, ...] = ()
    force_python: bool = False

    def __post_init__(self):
        if not self.fanchors:
            fa = tuple(float(x) for x in self.flux.eval(np.asarray(self.anchors, dtype=float)))
            object.__setattr__(self, "fanchors", fa)
        object.__setattr__(self, "_impl", self._make_impl())

    def _spec(self):
        fk = self.flux.kernel_params()
        if fk is not None:
            fkind, fparams, fcoef = fk[0], fk[1], ()
        elif getattr(self.flux, "coeffs", None) is not None:
            fkind, fparams, fcoef = -2, (0.0,) * 6, self.flux.coeffs
        else:
            return None
        dk = self.diff.kernel_params()
        if dk is not None:
            dkind, dparams, dvkind, dvparams, scale = dk
            dcoef = ()
        elif getattr(self.diff, "coeffs", None) is not None:
            dkind, dparams, dvkind, dvparams, scale = -2, (0.0,) * 4, -1, (0.0,) * 6, self.diff.scale
            dcoef = self.diff.coeffs
        else:
            return None
        return (int(fkind), tuple(fparams), tuple(fcoef), int(dkind), int(dvkind),
                tuple(dvparams), tuple(dparams), tuple(dcoef), float(scale), float(self.c),
                tuple(float(a) for a in self.anchors), tuple(self.fanchors))

    def _make_impl(self):
        if self.force_python or _ckernels is None:
            return None
        spec = self._spec()
        if spec is None:
            return None
        try:
            return _ckernels.Context(spec)
        except ValueError:
            return None

    @property
    def backend(self) -> str:
        return _pykernels.NAME if self._impl is None else _ckernels.NAME

    def with_python(self) -> "KernelContext":
        return KernelContext(self.flux, self.diff, self.c, self.anchors, self.fanchors, True)

    # dispatch -----------------------------------------------------------
    def eval_models(self, rho):
        if self._impl is None:
            return _pykernels.eval_models(self, rho)
        return self._impl.eval_models(np.asarray(rho, dtype=float))

    def integrand(self, phi):
        if self._impl is None:
            return _pykernels.integrand(self, phi)
        return self._impl.integrand(np.asarray(phi, dtype=float))

    def rhs(self, phi):
        if self._impl is None:
            return _pykernels.rhs(self, phi)
        return self._impl.rhs(np.asarray(phi, dtype=float))

    def gk_integrate(self, a, b, rtol=1e-13, atol=1e-300):
        if self._impl is None:
            return _pykernels.gk_integrate(self, a, b, rtol, atol)
        return self._impl.gk_integrate(a, b, rtol, atol)

    def dopri5(self, xi0, phi0, direction, lo, hi, target, **kw):
        if self._impl is None:
            return _pykernels.dopri5(self, xi0, phi0, direction, lo, hi, target, **kw)
        return self._impl.dopri5(float(xi0), float(phi0), int(direction), float(lo),
                                 float(hi), float(target), **kw)
