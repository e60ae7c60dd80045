"""Pure-Python (numpy) kernels. Reference implementation and fallback."""
from __future__ import annotations

import math

import numpy as np

NAME = "python"

# Kronrod 15-point abscissae on [0, 1] (symmetric) with Kronrod and Gauss weights
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
# full 15-node layout: -x0..-x6, 0, x6..x0
NODES = np.concatenate([-XGK[:7], [0.0], XGK[6::-1]])
KWEIGHTS = np.concatenate([WGK[:7], [WGK[7]], WGK[6::-1]])
GWEIGHTS = np.zeros(15)
GWEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = [WG[0], WG[1], WG[2], WG[3], WG[2], WG[1], WG[0]]

REMOVABLE_TOL = 1e-12
MAX_DEPTH = 50
MAX_PIECES = 1 << 16
EPS = np.finfo(float).eps
NOISE_FACTOR = 50.0


def _chord(ctx, r):
    """``F(r)`` anchored at the nearest anchor, together with ``F'``."""
    return _chord_noise(ctx, r)[:2]


def eval_models(ctx, rho):
    r = np.asarray(rho, dtype=float)
    f, df, _ = ctx.flux._all(r)
    D, dD = ctx.diff._both(r)
    return f, df, D, dD


def _chord_noise(ctx, r):
    """``F``, ``F'`` and the rounding level of ``F`` (absolute)."""
    f, df, _ = ctx.flux._all(r)
    anchors = np.asarray(ctx.anchors)
    fan = np.asarray(ctx.fanchors)
    idx = np.argmin(np.abs(r[..., None] - anchors), axis=-1)
    p = anchors[idx]
    F = (f - fan[idx]) - ctx.c * (r - p)
    noise = EPS * (np.abs(f) + np.abs(fan[idx]) + abs(ctx.c) * (np.abs(r) + np.abs(p)))
    return F, df - ctx.c, noise


def integrand_noise(ctx, phi):
    """``D/F`` and the absolute rounding level of that value."""
    r = np.asarray(phi, dtype=float)
    F, dF, nF = _chord_noise(ctx, r)
    D, dD = ctx.diff._both(r)
    nD = ctx.diff._rounding(r)
    rem = (np.abs(F) < REMOVABLE_TOL) & (np.abs(D) < REMOVABLE_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(rem, dD / dF, D / F)
        aF = np.abs(F)
        noise = np.where(rem, EPS * np.abs(out), (np.abs(D) * nF / aF + nD) / aF + EPS * np.abs(out))
    return out, noise


def integrand(ctx, phi):
    """``D/F`` with first-order expansions at common zeros of ``D`` and ``F``."""
    return integrand_noise(ctx, phi)[0]


def rhs(ctx, phi):
    """``F/D`` with the same removable-zero treatment."""
    r = np.asarray(phi, dtype=float)
    F, dF = _chord(ctx, r)
    D, dD = ctx.diff._both(r)
    rem = (np.abs(F) < REMOVABLE_TOL) & (np.abs(D) < REMOVABLE_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rem, dF / dD, F / D)


def gk_integrate(ctx, a, b, rtol=1e-13, atol=1e-300):
    """Adaptive Gauss-Kronrod 15 of ``D/F`` over each ``[a[i], b[i]]``.

    A piece is accepted when the Kronrod-Gauss difference is below the
    requested tolerance or below the rounding level of the integrand (the
    chord residual ``F`` and the cancelling terms of ``D`` lose digits near
    their zeros). Subdivision stops at depth ``MAX_DEPTH`` or after
    ``MAX_PIECES`` splits per interval. Returns
    ``(values, n_evals, capped)``; ``capped`` counts pieces accepted at the
    depth limit.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    total = np.zeros(a.shape)
    owner = np.arange(a.size)
    lo, hi = a.copy(), b.copy()
    depth = 0
    nev = 0
    capped = 0
    pieces = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * NODES[None, :]
        fx, nx = integrand_noise(ctx, x)
        nev += fx.size
        K = half * (fx @ KWEIGHTS)
        G = half * (fx @ GWEIGHTS)
        err = np.abs(K - G)
        noise = NOISE_FACTOR * np.abs(half) * (nx @ KWEIGHTS)
        tol = np.maximum(np.maximum(atol, rtol * np.abs(K)), noise)
        ok = np.isfinite(K) & (err <= tol)
        pieces += int(np.count_nonzero(~ok))
        if depth >= MAX_DEPTH or pieces > MAX_PIECES * a.size:
            capped += int(np.count_nonzero(~ok))
            ok = np.ones_like(ok)
        np.add.at(total, owner[ok], K[ok])
        bad = ~ok
        owner = np.concatenate([owner[bad], owner[bad]])
        lo, hi = np.concatenate([lo[bad], mid[bad]]), np.concatenate([mid[bad], hi[bad]])
        depth += 1
    return total, nev, capped


# Dormand-Prince 5(4) tableau
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

STATUS_TARGET = 0
STATUS_HORIZON = 1
STATUS_UNDERFLOW = 2
STATUS_MAXSTEPS = 3


def _scalar_rhs(ctx):
    def g(y):
        return float(rhs(ctx, np.array([y]))[0])
    return g


def dopri5(ctx, xi0, phi0, direction, lo, hi, target, rtol=1e-12, atol=1e-16,
           h0=1e-6, tail_tol=1e-8, xi_max=1e6, max_steps=200000):
    """Integrate ``phi' = F/D`` from ``(xi0, phi0)`` in ``direction`` (+1/-1).

    Steps whose stages or result leave ``[lo, hi]`` are rejected. The local
    error is scaled by the distance to ``target`` so the approach to an
    asymptotic end keeps relative accuracy.
    Returns ``(xi, phi, status)``.
    """
    g = _scalar_rhs(ctx)
    xs = [xi0]
    ys = [phi0]
    x, y = xi0, phi0
    h = abs(h0)
    k1 = g(y)
    status = STATUS_MAXSTEPS
    for _ in range(max_steps):
        if abs(y - target) <= tail_tol:
            status = STATUS_TARGET
            break
        if abs(x) >= xi_max:
            status = STATUS_HORIZON
            break
        if h < 1e-14 * max(1.0, abs(x)):
            status = STATUS_UNDERFLOW
            break
        s = direction * h
        k = [k1]
        good = True
        for i in range(1, 7):
            yi = y + s * sum(_A[i][j] * k[j] for j in range(i))
            if not (lo <= yi <= hi):
                good = False
                break
            ki = g(yi)
            if not math.isfinite(ki):
                good = False
                break
            k.append(ki)
        if not good:
            h *= 0.5
            continue
        ynew = y + s * sum(_B[j] * k[j] for j in range(7))
        if not (lo <= ynew <= hi) or (ynew - target) * (y - target) < 0:
            h *= 0.5
            continue
        err = abs(s * sum(_E[j] * k[j] for j in range(7)))
        sc = atol + rtol * min(abs(y - target), abs(ynew - target))
        en = err / sc
        if en <= 1.0:
            x += s
            y = ynew
            k1 = k[6]
            xs.append(x)
            ys.append(y)
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h *= fac
        else:
            h *= max(0.2, 0.9 * en ** -0.2)
    return np.array(xs), np.array(ys), status
