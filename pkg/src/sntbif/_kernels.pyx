# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) core.

Twin of ``_kernels_py.py``: identical tableau, controller constants and
dense-output layout, with the stepping loop in C.  The planar models have
dimension <= 2, so all per-step state lives in fixed stack arrays.
"""

from libc.math cimport sqrt, fabs, isfinite, fmax, fmin, pow

import numpy as np

BACKEND_NAME = "cython"

STATUS_DONE = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3

MODEL_DIMS = (2, 1, 2, 1, 2)

cdef int[5] _DIMS = [2, 1, 2, 1, 2]

cdef double[7] _C = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0]
cdef double[7][6] _A = [
    [0, 0, 0, 0, 0, 0],
    [1.0 / 5.0, 0, 0, 0, 0, 0],
    [3.0 / 40.0, 9.0 / 40.0, 0, 0, 0, 0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0, 0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0, 0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0, 0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0],
]
cdef double[7] _E = [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
                     -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0]
cdef double[7] _D = [-12715105075.0 / 11282082432.0, 0.0,
                     87487479700.0 / 32700410799.0,
                     -10690763975.0 / 1880347072.0,
                     701980252875.0 / 199316789632.0,
                     -1453857185.0 / 822651844.0,
                     69997945.0 / 29380423.0]

cdef double _SAFE = 0.9
cdef double _BETA = 0.04
cdef double _EXPO1 = 0.2 - 0.04 * 0.75
cdef double _FACC1 = 5.0
cdef double _FACC2 = 0.1


cdef inline void _rhs(int kernel_id, double* p, double* y, double* out) nogil:
    cdef double x1, x2, x, yy, z, z1, z2
    if kernel_id == 0:
        x1 = y[0]; x2 = y[1]
        out[0] = x1 * (p[0] + p[1] * x1 + p[2] * x2) + p[6]
        out[1] = x2 * (p[5] + p[3] * x1 + p[4] * x2)
    elif kernel_id == 1:
        x = y[0]
        out[0] = p[0] * x + p[1] * x * x + p[2] * x * x * x
    elif kernel_id == 2:
        x = y[0]; yy = y[1]
        out[0] = yy
        out[1] = (p[0] * x + p[2] * p[1] * yy + p[1] * x * x + p[3] * x * yy
                  + x * x * yy + p[5] * x * x * x + p[4] * x * x * x * x
                  + p[6] * p[1] * p[1] * x * x + p[7] * p[1] * x * x * x)
    elif kernel_id == 3:
        z = y[0]
        out[0] = p[0] + p[1] * z + z * z * z
    else:
        z1 = y[0]; z2 = y[1]
        out[0] = z2
        out[1] = (p[0] + p[1] * z1 + p[2] * z2 + p[3] * z1 * z2
                  + z1 * z1 * z2 + p[4] * z1 * z1 * z1)


def field_eval(int kernel_id, params, y, out=None):
    cdef double[8] pp
    cdef double[2] yy
    cdef double[2] ff
    cdef int i, dim
    if kernel_id < 0 or kernel_id > 4:
        raise ValueError(f"unknown kernel id {kernel_id}")
    dim = _DIMS[kernel_id]
    p = np.asarray(params, dtype=float)
    s = np.asarray(y, dtype=float)
    for i in range(p.shape[0]):
        pp[i] = p[i]
    for i in range(dim):
        yy[i] = s[i]
    _rhs(kernel_id, pp, yy, ff)
    if out is None:
        out = np.empty(dim)
    for i in range(dim):
        out[i] = ff[i]
    return out


def integrate_span(int kernel_id, params, y0, double t0, double t1,
                   double rtol, double atol, double h0=0.0,
                   long max_steps=1000000):
    """Same contract as the pure-Python ``integrate_span``."""
    cdef int dim = _DIMS[kernel_id]
    cdef double[8] p
    cdef double[2] y
    cdef double[2] ynew
    cdef double[2] yi
    cdef double[7][2] k
    cdef double[2] sc
    cdef int i, j, m
    cdef double t = t0
    cdef double posneg, span, h, hh, err, s, acc, d0, d1, d2, dm, h1
    cdef double fac11, fac, hnew, facold, ydiff, bspl
    cdef bint reject = False, last = False, bad = False
    cdef long nsteps = 0, cap = 256, n = 0
    cdef int status = STATUS_MAX_STEPS

    par = np.asarray(params, dtype=float)
    for i in range(par.shape[0]):
        p[i] = par[i]
    ya = np.asarray(y0, dtype=float).reshape(dim)
    for i in range(dim):
        y[i] = ya[i]

    if t1 == t0:
        return (np.array([t0]), ya[None, :].copy(),
                np.empty((0, 5, dim)), STATUS_DONE)
    posneg = 1.0 if t1 > t0 else -1.0
    span = fabs(t1 - t0)

    _rhs(kernel_id, p, y, k[0])
    for i in range(dim):
        if not isfinite(k[0][i]):
            return (np.array([t0]), ya[None, :].copy(),
                    np.empty((0, 5, dim)), STATUS_NONFINITE)

    # initial step heuristic (matches the python twin)
    if h0 > 0.0:
        h = fabs(h0)
    else:
        d0 = 0.0; d1 = 0.0
        for i in range(dim):
            s = atol + rtol * fabs(y[i])
            d0 += (y[i] / s) ** 2
            d1 += (k[0][i] / s) ** 2
        d0 = sqrt(d0 / dim); d1 = sqrt(d1 / dim)
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = fmin(h, span)
        for i in range(dim):
            yi[i] = y[i] + h * posneg * k[0][i]
        _rhs(kernel_id, p, yi, k[1])
        d2 = 0.0
        for i in range(dim):
            s = atol + rtol * fabs(y[i])
            d2 += ((k[1][i] - k[0][i]) / s) ** 2
        d2 = sqrt(d2 / dim) / h
        dm = fmax(d1, d2)
        h1 = fmax(1e-6, h * 1e-3) if dm <= 1e-15 else pow(0.01 / dm, 0.2)
        h = fmin(fmin(100.0 * h, h1), span)

    ts_arr = np.empty(cap)
    ys_arr = np.empty((cap, dim))
    de_arr = np.empty((cap, 5, dim))
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] ys = ys_arr
    cdef double[:, :, ::1] de = de_arr
    ts[0] = t
    for i in range(dim):
        ys[0, i] = y[i]

    facold = 1e-4
    while nsteps < max_steps:
        nsteps += 1
        if fabs(h) < 1e-14 * fmax(1.0, fabs(t)):
            status = STATUS_STEP_UNDERFLOW
            break
        if fabs(t - t1) <= fabs(h):
            h = fabs(t1 - t)
            last = True
        else:
            last = False
        hh = h * posneg

        for i in range(1, 7):
            for m in range(dim):
                acc = 0.0
                for j in range(i):
                    acc += _A[i][j] * k[j][m]
                yi[m] = y[m] + hh * acc
            _rhs(kernel_id, p, yi, k[i])
        for m in range(dim):
            ynew[m] = yi[m]  # stage 7 point is the 5th-order solution

        err = 0.0
        for m in range(dim):
            acc = 0.0
            for j in range(7):
                acc += _E[j] * k[j][m]
            acc *= hh
            sc[m] = atol + rtol * fmax(fabs(y[m]), fabs(ynew[m]))
            err += (acc / sc[m]) ** 2
        err = sqrt(err / dim)
        if not isfinite(err):
            status = STATUS_NONFINITE
            break
        bad = False
        for m in range(dim):
            if not isfinite(ynew[m]):
                bad = True
        if bad:
            status = STATUS_NONFINITE
            break

        fac11 = pow(err, _EXPO1)
        fac = fac11 / pow(facold, _BETA)
        fac = fmax(_FACC2, fmin(_FACC1, fac / _SAFE))
        hnew = h / fac

        if err <= 1.0:
            facold = fmax(err, 1e-4)
            if n + 1 >= cap:
                cap *= 2
                ts_arr = np.resize(ts_arr, cap)
                ys_arr = np.resize(ys_arr, (cap, dim))
                de_arr = np.resize(de_arr, (cap, 5, dim))
                ts = ts_arr
                ys = ys_arr
                de = de_arr
            for m in range(dim):
                ydiff = ynew[m] - y[m]
                bspl = hh * k[0][m] - ydiff
                de[n, 0, m] = y[m]
                de[n, 1, m] = ydiff
                de[n, 2, m] = bspl
                de[n, 3, m] = ydiff - hh * k[6][m] - bspl
                acc = 0.0
                for j in range(7):
                    acc += _D[j] * k[j][m]
                de[n, 4, m] = hh * acc
            t = t1 if last else t + hh
            for m in range(dim):
                y[m] = ynew[m]
                k[0][m] = k[6][m]  # FSAL
            n += 1
            ts[n] = t
            for m in range(dim):
                ys[n, m] = y[m]
            if last:
                status = STATUS_DONE
                break
            if reject:
                hnew = fmin(hnew, h)
            reject = False
            h = hnew
        else:
            reject = True
            h = h / fmin(_FACC1, fac11 / _SAFE)

    return (ts_arr[: n + 1].copy(), ys_arr[: n + 1].copy(),
            de_arr[:n].copy(), status)
