"""Compiled fixed-step trajectory loops for systems that carry a numba kernel.

Same step kernels as the Python path; only the outer loop and the model
evaluation are compiled.  Startup values come from RK4 at the same step.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .classical import ab_update
from .core import OVERFLOW_CAP
from .eab import eab_update
from .ieab import ieab_update

FAM_EAB, FAM_IEAB, FAM_AB, FAM_RK4 = 0, 1, 2, 3


@njit(cache=False, error_model="numpy")
def _rk4(kernel, P, t, y, h, a, b, out):
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    kernel(t, y, P, a, b)
    k1[:] = a * y + b
    tmp = y + 0.5 * h * k1
    kernel(t + 0.5 * h, tmp, P, a, b)
    k2[:] = a * tmp + b
    tmp = y + 0.5 * h * k2
    kernel(t + 0.5 * h, tmp, P, a, b)
    k3[:] = a * tmp + b
    tmp = y + h * k3
    kernel(t + h, tmp, P, a, b)
    k4[:] = a * tmp + b
    out[:] = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=False, error_model="numpy")
def _bad(y):
    for i in range(y.shape[0]):
        if not np.isfinite(y[i]) or abs(y[i]) > OVERFLOW_CAP:
            return True
    return False


@njit(nogil=True, cache=False, error_model="numpy")
def march(family, k, kernel, P, y0, t0, h, n_steps, keep):
    """Integrate ``n_steps`` steps; returns ``(records, steps_done, overflowed)``.

    ``records[n]`` holds ``y_n[keep]``.
    """
    N = y0.shape[0]
    rec = np.empty((n_steps + 1, keep.shape[0]))
    Y = np.zeros((k, N))
    A = np.zeros((k, N))
    B = np.zeros((k, N))
    a = np.empty(N)
    b = np.empty(N)
    F = np.empty((k, N))
    y = y0.copy()
    y_new = np.empty(N)
    for c in range(keep.shape[0]):
        rec[0, c] = y[keep[c]]
    Y[k - 1] = y
    kernel(t0, y, P, a, b)
    A[k - 1] = a
    B[k - 1] = b
    filled = 1
    for n in range(n_steps):
        t = t0 + n * h
        if family == FAM_RK4 or filled < k:
            _rk4(kernel, P, t, y, h, a, b, y_new)
        elif family == FAM_EAB:
            eab_update(k, h, Y, A, B, y_new)
        elif family == FAM_IEAB:
            ieab_update(k, h, Y, A, B, y_new)
        else:
            for r in range(k):
                F[r] = A[r] * Y[r] + B[r]
            ab_update(k, h, y, F, y_new)
        if _bad(y_new):
            return rec[:n + 1], n, True
        y[:] = y_new
        for c in range(keep.shape[0]):
            rec[n + 1, c] = y[keep[c]]
        if family != FAM_RK4:
            for r in range(k - 1):
                Y[r] = Y[r + 1]
                A[r] = A[r + 1]
                B[r] = B[r + 1]
            kernel(t0 + (n + 1) * h, y, P, a, b)
            Y[k - 1] = y
            A[k - 1] = a
            B[k - 1] = b
            filled += 1
    return rec, n_steps, False
