"""Pure-Python Dormand-Prince 5(4) core.

Mirrors the compiled extension in ``_kernels.pyx`` step for step: same
tableau, same PI controller constants, same dense-output coefficients.
Selected automatically when the extension is unavailable (or when the
environment variable SNTBIF_BACKEND=python forces it).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

# status codes shared with the compiled kernel
STATUS_DONE = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_NONFINITE = 3

MODEL_DIMS = (2, 1, 2, 1, 2)  # MLV, ST1_MIN, ST2_MIN, CUSP_UNF, DBT_TRUNC

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)

_SAFE = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - _BETA * 0.75
_FACC1 = 5.0  # 1 / fac_min
_FACC2 = 0.1  # 1 / fac_max


def field_eval(kernel_id, params, y, out=None):
    """Right-hand side of model ``kernel_id`` with packed parameters."""
    p = params
    if out is None:
        out = np.empty(MODEL_DIMS[kernel_id])
    if kernel_id == 0:  # MLV: [b1, a11, a12, a21, a22, b2, e]
        x1, x2 = y[0], y[1]
        out[0] = x1 * (p[0] + p[1] * x1 + p[2] * x2) + p[6]
        out[1] = x2 * (p[5] + p[3] * x1 + p[4] * x2)
    elif kernel_id == 1:  # ST1_MIN: [a, b, eps]
        x = y[0]
        out[0] = p[0] * x + p[1] * x * x + p[2] * x * x * x
    elif kernel_id == 2:  # ST2_MIN: [a, b, k1, k2, k3, eps, k4, k5]
        x, yy = y[0], y[1]
        out[0] = yy
        out[1] = (
            p[0] * x
            + p[2] * p[1] * yy
            + p[1] * x * x
            + p[3] * x * yy
            + x * x * yy
            + p[5] * x * x * x
            + p[4] * x * x * x * x
            + p[6] * p[1] * p[1] * x * x
            + p[7] * p[1] * x * x * x
        )
    elif kernel_id == 3:  # CUSP_UNF: [mu, nu]
        z = y[0]
        out[0] = p[0] + p[1] * z + z * z * z
    elif kernel_id == 4:  # DBT_TRUNC: [mu1, mu2, nu, k2, eps]
        z1, z2 = y[0], y[1]
        out[0] = z2
        out[1] = (
            p[0]
            + p[1] * z1
            + p[2] * z2
            + p[3] * z1 * z2
            + z1 * z1 * z2
            + p[4] * z1 * z1 * z1
        )
    else:
        raise ValueError(f"unknown kernel id {kernel_id}")
    return out


def _initial_step(kernel_id, params, y0, f0, posneg, rtol, atol, span):
    sc = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / sc) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / sc) ** 2)))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * posneg * f0
    f1 = field_eval(kernel_id, params, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / sc) ** 2))) / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1, span)


def integrate_span(
    kernel_id,
    params,
    y0,
    t0,
    t1,
    rtol,
    atol,
    h0=0.0,
    max_steps=1_000_000,
):
    """Integrate from t0 to t1 (either direction), returning the accepted
    mesh, states, and per-step dense-output coefficients.

    Returns (ts, ys, dense, status) where dense[i] holds the five
    interpolation vectors of step i (Hairer's CONTD5 layout).
    """
    params = np.asarray(params, dtype=float)
    dim = MODEL_DIMS[kernel_id]
    y = np.array(y0, dtype=float).reshape(dim)
    t = float(t0)
    t1 = float(t1)
    if t1 == t:
        return (
            np.array([t]),
            y[None, :].copy(),
            np.empty((0, 5, dim)),
            STATUS_DONE,
        )
    posneg = 1.0 if t1 > t else -1.0
    span = abs(t1 - t)

    f = field_eval(kernel_id, params, y)
    if not np.all(np.isfinite(f)):
        return np.array([t]), y[None, :].copy(), np.empty((0, 5, dim)), STATUS_NONFINITE
    h = abs(h0) if h0 > 0.0 else _initial_step(
        kernel_id, params, y, f, posneg, rtol, atol, span
    )

    ts = [t]
    ys = [y.copy()]
    dense = []
    k = np.empty((7, dim))
    yi = np.empty(dim)
    facold = 1e-4
    reject = False
    status = STATUS_MAX_STEPS

    for _ in range(max_steps):
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            status = STATUS_STEP_UNDERFLOW
            break
        if (abs(t - t1)) <= abs(h):
            h = abs(t1 - t)
            last = True
        else:
            last = False
        hh = h * posneg

        # scalar left-to-right accumulation, matching the compiled kernel
        # term for term so both backends round identically
        k[0] = f
        for i in range(1, 7):
            ai = _A[i]
            for m in range(dim):
                acc = 0.0
                for j in range(i):
                    acc += ai[j] * k[j, m]
                yi[m] = y[m] + hh * acc
            field_eval(kernel_id, params, yi, out=k[i])
        ynew = yi.copy()  # stage 7 uses the 5th-order solution point
        err = 0.0
        for m in range(dim):
            acc = 0.0
            for j in range(7):
                acc += _E[j] * k[j, m]
            acc *= hh
            sc = atol + rtol * max(abs(y[m]), abs(ynew[m]))
            err += (acc / sc) ** 2
        err = math.sqrt(err / dim)
        if not (math.isfinite(err) and np.all(np.isfinite(ynew))):
            status = STATUS_NONFINITE
            break

        fac11 = err**_EXPO1
        fac = fac11 / facold**_BETA
        fac = max(_FACC2, min(_FACC1, fac / _SAFE))
        hnew = h / fac

        if err <= 1.0:
            facold = max(err, 1e-4)
            row = np.empty((5, dim))
            for m in range(dim):
                ydiff = ynew[m] - y[m]
                bspl = hh * k[0, m] - ydiff
                row[0, m] = y[m]
                row[1, m] = ydiff
                row[2, m] = bspl
                row[3, m] = ydiff - hh * k[6, m] - bspl
                acc = 0.0
                for j in range(7):
                    acc += _D[j] * k[j, m]
                row[4, m] = hh * acc
            dense.append(row)
            t = t1 if last else t + hh
            y = ynew.copy()
            f = k[6].copy()  # FSAL
            ts.append(t)
            ys.append(y.copy())
            if last:
                status = STATUS_DONE
                break
            if reject:
                hnew = min(hnew, h)
            reject = False
            h = hnew
        else:
            reject = True
            h = h / min(_FACC1, fac11 / _SAFE)

    return (
        np.array(ts),
        np.array(ys),
        np.array(dense) if dense else np.empty((0, 5, dim)),
        status,
    )
