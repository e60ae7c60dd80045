# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for packaged laws and polynomial models.

Mirrors ``_pykernels`` operation for operation; parity is tested.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, pow, isfinite, INFINITY, NAN

cnp.import_array()

NAME = "cython"

cdef enum:
    MAXC = 24
    MAXA = 4
    MAX_DEPTH = 50
    MAX_PIECES = 65536

cdef double REMOVABLE_TOL = 1e-12
cdef double EPS = 2.220446049250313e-16
cdef double NOISE_FACTOR = 50.0

cdef struct ctx_t:
    int fkind          # velocity code >= 0, -2 polynomial
    double fp[6]
    int fn
    double fc[MAXC]
    int dkind          # diffusivity code >= 0, -2 polynomial
    int dvkind
    double dvp[6]
    double dp[4]
    int dn
    double dc[MAXC]
    double scale
    double c
    int na
    double anc[MAXA]
    double fanc[MAXA]

cdef double XGK[8]
cdef double WGK[8]
cdef double WG[4]
XGK[:] = [0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
          0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
          0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
          0.207784955007898467600689403773245, 0.0]
WGK[:] = [0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
          0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
          0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
          0.204432940075298892414161999234649, 0.209482141084727828012999174891714]
WG[:] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
         0.381830050505118944950369775488975, 0.417959183673469387755102040816327]


cdef void velocity(int kind, double* prm, double r, double* v, double* dv, double* d2v) nogil:
    cdef double vb = prm[0], gam = prm[1], a = prm[2], p = prm[3], q = prm[4], c = prm[5]
    cdef double u, e, rs, g, g1, g2, kink
    cdef bint right
    if kind == 0:
        v[0] = vb * (1.0 - r); dv[0] = -vb; d2v[0] = 0.0
    elif kind == 1:
        v[0] = vb * (1.0 - r) * (1.0 - r); dv[0] = -2.0 * vb * (1.0 - r); d2v[0] = 2.0 * vb
    elif kind == 2:
        u = 1.0 - pow(r, p)
        v[0] = vb * pow(u, q)
        dv[0] = -vb * q * p * pow(r, p - 1.0) * pow(u, q - 1.0)
        d2v[0] = vb * q * p * ((q - 1.0) * p * pow(r, 2.0 * p - 2.0) * pow(u, q - 2.0)
                               - (p - 1.0) * pow(r, p - 2.0) * pow(u, q - 1.0))
        if p >= 1.0 and r == 0.0:
            dv[0] = -vb * q if p == 1.0 else 0.0
        if d2v[0] != d2v[0]:
            d2v[0] = 0.0
    elif kind == 3:
        if r > 0.0:
            e = exp(gam * (1.0 - 1.0 / r))
            v[0] = vb * (1.0 - e)
            dv[0] = -vb * e * gam / (r * r)
            d2v[0] = -vb * gam * e * (gam / (r * r * r * r) - 2.0 / (r * r * r))
        else:
            v[0] = vb; dv[0] = 0.0; d2v[0] = 0.0
    elif kind == 4:
        right = (r >= a) if a > 0.0 else True
        if right and r < 1.0:
            g = (a - r) / (1.0 - r)
            g1 = (a - 1.0) / ((1.0 - r) * (1.0 - r))
            g2 = 2.0 * (a - 1.0) / ((1.0 - r) * (1.0 - r) * (1.0 - r))
            e = exp(gam * g)
            v[0] = vb * e
            dv[0] = vb * e * gam * g1
            d2v[0] = vb * e * (gam * gam * g1 * g1 + gam * g2)
        else:
            v[0] = 0.0 if right else vb
            dv[0] = 0.0; d2v[0] = 0.0
    elif kind == 5:
        kink = exp(-1.0 / c)
        if r >= kink:
            v[0] = -vb * c * log(r); dv[0] = -vb * c / r; d2v[0] = vb * c / (r * r)
        else:
            v[0] = vb; dv[0] = 0.0; d2v[0] = 0.0
    else:
        v[0] = NAN; dv[0] = NAN; d2v[0] = NAN


cdef inline void horner(double* cf, int n, double r, double* p0, double* p1, double* p2) nogil:
    cdef int i
    cdef double a0 = 0.0, a1 = 0.0, a2 = 0.0
    for i in range(n - 1, -1, -1):
        a2 = a2 * r + 2.0 * a1
        a1 = a1 * r + a0
        a0 = a0 * r + cf[i]
    p0[0] = a0; p1[0] = a1; p2[0] = a2


cdef void flux(ctx_t* x, double r, double* f, double* df) nogil:
    cdef double v, dv, d2v, f2
    if x.fkind == -2:
        horner(x.fc, x.fn, r, f, df, &f2)
    else:
        velocity(x.fkind, x.fp, r, &v, &dv, &d2v)
        f[0] = r * v
        df[0] = v + r * dv


cdef void diffusivity(ctx_t* x, double r, double* D, double* dD) nogil:
    cdef double v, dv, d2v, g, g1, w, fp, fpp, d2
    cdef double delta = x.dp[0], tau = x.dp[1], h = x.dp[2], vb = x.dp[3]
    if x.dkind == -2:
        horner(x.dc, x.dn, r, D, dD, &d2)
    else:
        velocity(x.dvkind, x.dvp, r, &v, &dv, &d2v)
        g = r * dv
        g1 = dv + r * d2v
        if x.dkind == 0:
            D[0] = -g * (delta + tau * g); dD[0] = -g1 * (delta + 2.0 * tau * g)
        elif x.dkind == 1:
            D[0] = -delta * g; dD[0] = -delta * g1
        elif x.dkind == 2:
            w = h * v * v + tau * g
            D[0] = -g * w; dD[0] = -g1 * w - g * (2.0 * h * v * dv + tau * g1)
        elif x.dkind == 3:
            w = h * v + tau * g
            D[0] = -g * w; dD[0] = -g1 * w - g * (h * dv + tau * g1)
        elif x.dkind == 4:
            fp = v + g
            fpp = 2.0 * dv + r * d2v
            D[0] = tau * fp * (vb - fp); dD[0] = tau * fpp * (vb - 2.0 * fp)
        else:
            D[0] = NAN; dD[0] = NAN
    if x.scale != 1.0:
        D[0] = x.scale * D[0]
        dD[0] = x.scale * dD[0]


cdef double diff_rounding(ctx_t* x, double r) nogil:
    # size of the cancelling terms of D, times the unit roundoff
    cdef double v, dv, d2v, g, fp, size = 0.0, ar = fabs(r)
    cdef double delta = x.dp[0], tau = x.dp[1], h = x.dp[2], vb = x.dp[3]
    cdef int i
    if x.dkind == -2:
        for i in range(x.dn - 1, -1, -1):
            size = size * ar + fabs(x.dc[i])
        return 2.0 * x.dn * EPS * fabs(x.scale) * size
    velocity(x.dvkind, x.dvp, r, &v, &dv, &d2v)
    g = fabs(r * dv)
    if x.dkind == 0:
        size = g * (delta + tau * g)
    elif x.dkind == 1:
        size = delta * g
    elif x.dkind == 2:
        size = g * (h * v * v + tau * g)
    elif x.dkind == 3:
        size = g * (h * fabs(v) + tau * g)
    else:
        fp = fabs(v + r * dv)
        size = tau * fp * (vb + fp)
    return 4.0 * EPS * fabs(x.scale) * size


cdef void chord(ctx_t* x, double r, double* F, double* dF) nogil:
    cdef int i, best = 0
    cdef double f, df, d, dbest = fabs(r - x.anc[0])
    for i in range(1, x.na):
        d = fabs(r - x.anc[i])
        if d < dbest:
            dbest = d; best = i
    flux(x, r, &f, &df)
    F[0] = (f - x.fanc[best]) - x.c * (r - x.anc[best])
    dF[0] = df - x.c


cdef double integrand1(ctx_t* x, double r) nogil:
    cdef double rel
    return integrand_noise1(x, r, &rel)


cdef double integrand_noise1(ctx_t* x, double r, double* noise) nogil:
    # D/F and its absolute rounding level
    cdef int i, best = 0
    cdef double f, df, d, F, D, dD, out, nF, dbest = fabs(r - x.anc[0])
    for i in range(1, x.na):
        d = fabs(r - x.anc[i])
        if d < dbest:
            dbest = d; best = i
    flux(x, r, &f, &df)
    F = (f - x.fanc[best]) - x.c * (r - x.anc[best])
    diffusivity(x, r, &D, &dD)
    if fabs(F) < REMOVABLE_TOL and fabs(D) < REMOVABLE_TOL:
        out = dD / (df - x.c)
        noise[0] = EPS * fabs(out)
        return out
    out = D / F
    nF = EPS * (fabs(f) + fabs(x.fanc[best]) + fabs(x.c) * (fabs(r) + fabs(x.anc[best])))
    noise[0] = (fabs(D) * nF / fabs(F) + diff_rounding(x, r)) / fabs(F) + EPS * fabs(out)
    return out


cdef double rhs1(ctx_t* x, double r) nogil:
    cdef double F, dF, D, dD
    chord(x, r, &F, &dF)
    diffusivity(x, r, &D, &dD)
    if fabs(F) < REMOVABLE_TOL and fabs(D) < REMOVABLE_TOL:
        return dF / dD
    return F / D


cdef class Context:
    cdef ctx_t c

    def __init__(self, tuple spec):
        (fkind, fparams, fcoef, dkind, dvkind, dvparams, dparams, dcoef,
         scale, speed, anchors, fanchors) = spec
        cdef int i
        if len(fcoef) > MAXC or len(dcoef) > MAXC or len(anchors) > MAXA or len(anchors) == 0:
            raise ValueError("context too large for compiled kernels")
        self.c.fkind = fkind
        self.c.dkind = dkind
        self.c.dvkind = dvkind
        for i in range(6):
            self.c.fp[i] = fparams[i]
            self.c.dvp[i] = dvparams[i]
        for i in range(4):
            self.c.dp[i] = dparams[i]
        self.c.fn = len(fcoef)
        for i in range(self.c.fn):
            self.c.fc[i] = fcoef[i]
        self.c.dn = len(dcoef)
        for i in range(self.c.dn):
            self.c.dc[i] = dcoef[i]
        self.c.scale = scale
        self.c.c = speed
        self.c.na = len(anchors)
        for i in range(self.c.na):
            self.c.anc[i] = anchors[i]
            self.c.fanc[i] = fanchors[i]

    def eval_models(self, rho):
        cdef cnp.ndarray[double, ndim=1] r = np.ascontiguousarray(np.ravel(rho), dtype=float)
        cdef Py_ssize_t i, n = r.shape[0]
        cdef cnp.ndarray[double, ndim=1] f = np.empty(n), df = np.empty(n)
        cdef cnp.ndarray[double, ndim=1] D = np.empty(n), dD = np.empty(n)
        for i in range(n):
            flux(&self.c, r[i], &f[i], &df[i])
            diffusivity(&self.c, r[i], &D[i], &dD[i])
        shape = np.shape(rho)
        return f.reshape(shape), df.reshape(shape), D.reshape(shape), dD.reshape(shape)

    def integrand(self, phi):
        cdef cnp.ndarray[double, ndim=1] r = np.ascontiguousarray(np.ravel(phi), dtype=float)
        cdef Py_ssize_t i, n = r.shape[0]
        cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
        for i in range(n):
            out[i] = integrand1(&self.c, r[i])
        return out.reshape(np.shape(phi))

    def rhs(self, phi):
        cdef cnp.ndarray[double, ndim=1] r = np.ascontiguousarray(np.ravel(phi), dtype=float)
        cdef Py_ssize_t i, n = r.shape[0]
        cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
        for i in range(n):
            out[i] = rhs1(&self.c, r[i])
        return out.reshape(np.shape(phi))

    def gk_integrate(self, a, b, double rtol=1e-13, double atol=1e-300):
        cdef cnp.ndarray[double, ndim=1] aa = np.ascontiguousarray(np.atleast_1d(a), dtype=float)
        cdef cnp.ndarray[double, ndim=1] bb = np.ascontiguousarray(np.atleast_1d(b), dtype=float)
        cdef Py_ssize_t i, n = aa.shape[0]
        cdef cnp.ndarray[double, ndim=1] out = np.empty(n)
        cdef long nev = 0, capped = 0
        for i in range(n):
            out[i] = _adapt(&self.c, aa[i], bb[i], rtol, atol, &nev, &capped)
        return out, nev, capped

    def dopri5(self, double xi0, double phi0, int direction, double lo, double hi,
               double target, double rtol=1e-12, double atol=1e-16, double h0=1e-6,
               double tail_tol=1e-8, double xi_max=1e6, long max_steps=200000):
        xs = [xi0]
        ys = [phi0]
        cdef double x = xi0, y = phi0, h = fabs(h0), s, yi, ynew, err, sc, en, fac
        cdef double k[7]
        cdef int i, j, status = 3
        cdef long it
        cdef bint good
        k[0] = rhs1(&self.c, y)
        for it in range(max_steps):
            if fabs(y - target) <= tail_tol:
                status = 0
                break
            if fabs(x) >= xi_max:
                status = 1
                break
            if h < 1e-14 * (fabs(x) if fabs(x) > 1.0 else 1.0):
                status = 2
                break
            s = direction * h
            good = True
            for i in range(1, 7):
                yi = y
                for j in range(i):
                    yi = _add_stage(yi, s, i, j, k)
                if not (lo <= yi <= hi):
                    good = False
                    break
                k[i] = rhs1(&self.c, yi)
                if not isfinite(k[i]):
                    good = False
                    break
            if not good:
                h *= 0.5
                continue
            ynew = y + s * (B[0] * k[0] + B[1] * k[1] + B[2] * k[2] + B[3] * k[3]
                            + B[4] * k[4] + B[5] * k[5] + B[6] * k[6])
            if not (lo <= ynew <= hi) or (ynew - target) * (y - target) < 0:
                h *= 0.5
                continue
            err = fabs(s * (E[0] * k[0] + E[1] * k[1] + E[2] * k[2] + E[3] * k[3]
                            + E[4] * k[4] + E[5] * k[5] + E[6] * k[6]))
            sc = atol + rtol * min(fabs(y - target), fabs(ynew - target))
            en = err / sc
            if en <= 1.0:
                x += s
                y = ynew
                k[0] = k[6]
                xs.append(x)
                ys.append(y)
                if en == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, max(0.2, 0.9 * pow(en, -0.2)))
                h *= fac
            else:
                h *= max(0.2, 0.9 * pow(en, -0.2))
        return np.array(xs), np.array(ys), status


cdef double A[42]
cdef double B[7]
cdef double E[7]
A[:] = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        1.0 / 5, 0.0, 0.0, 0.0, 0.0, 0.0,
        3.0 / 40, 9.0 / 40, 0.0, 0.0, 0.0, 0.0,
        44.0 / 45, -56.0 / 15, 32.0 / 9, 0.0, 0.0, 0.0,
        19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0.0, 0.0,
        9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0.0,
        35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
B[:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0]
E[:] = [71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40]


cdef inline double _add_stage(double yi, double s, int i, int j, double* k) nogil:
    return yi + s * A[6 * i + j] * k[j]


cdef double _gk15(ctx_t* x, double lo, double hi, double* err, double* noise) nogil:
    cdef double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo)
    cdef double r1, r2, rc
    cdef double fc = integrand_noise1(x, mid, &rc)
    cdef double K = WGK[7] * fc, G = WG[3] * fc, f1, f2
    cdef double N = WGK[7] * rc
    cdef int j
    for j in range(7):
        f1 = integrand_noise1(x, mid - half * XGK[j], &r1)
        f2 = integrand_noise1(x, mid + half * XGK[j], &r2)
        K += WGK[j] * (f1 + f2)
        N += WGK[j] * (r1 + r2)
        if j % 2 == 1:
            G += WG[j // 2] * (f1 + f2)
    K *= half
    G *= half
    err[0] = fabs(K - G)
    noise[0] = NOISE_FACTOR * fabs(half) * N
    return K


cdef double _adapt(ctx_t* x, double a, double b, double rtol, double atol,
                   long* nev, long* capped) nogil:
    # explicit stack, depth-first
    cdef double slo[MAX_DEPTH + 2]
    cdef double shi[MAX_DEPTH + 2]
    cdef int sdep[MAX_DEPTH + 2]
    cdef int top = 0, d
    cdef long pieces = 0
    cdef double lo, hi, K, err, noise, total = 0.0, mid, tol
    slo[0] = a; shi[0] = b; sdep[0] = 0
    while top >= 0:
        lo = slo[top]; hi = shi[top]; d = sdep[top]
        top -= 1
        K = _gk15(x, lo, hi, &err, &noise)
        nev[0] += 15
        tol = rtol * fabs(K)
        if tol < atol:
            tol = atol
        if tol < noise:
            tol = noise
        if (isfinite(K) and err <= tol) or d >= MAX_DEPTH or pieces > MAX_PIECES:
            if not (isfinite(K) and err <= tol):
                capped[0] += 1
            total += K
        else:
            pieces += 1
            mid = 0.5 * (lo + hi)
            top += 1
            slo[top] = mid; shi[top] = hi; sdep[top] = d + 1
            top += 1
            slo[top] = lo; shi[top] = mid; sdep[top] = d + 1
    return total
