"""Exponential Adams-Bashforth schemes EAB_k, k = 1..4.

With the diagonal stabilizer ``a_n`` frozen at ``t_n``, the remainder
``g_{n-i} = b_{n-i} + (a_{n-i} - a_n) y_{n-i}`` is extrapolated by its
Lagrange polynomial and the variation-of-constants integral is taken exactly:

    y_{n+1} = exp(a_n h) y_n + h * sum_j phi_j(a_n h) gamma_nj

For ``|a_n h| < 1`` the kernel uses the equivalent recursion
``w_1 = a_n y_n + b_n``, ``w_j = gamma_nj + a_n h w_{j-1}`` which needs only
``phi_k``; for larger ``|a_n h|`` the ``w_j`` grow like ``|a_n h|^j`` and the
direct sum is used.

History arrays are stacked ``(k, N)`` with the oldest sample in row 0.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import HistoryWindow, SchemeSpec, SplitSystem, check_finite, make_sample
from .phi import INV_FACT, TAYLOR_RADIUS, _phi_fill, phi_diag, phi_scalar

# GAMMA[k, j-1, i] is the weight of g_{n-i} in gamma_nj.
GAMMA = np.zeros((5, 4, 4))
GAMMA[1, 0, :1] = [1.0]
GAMMA[2, 0, :2] = [1.0, 0.0]
GAMMA[2, 1, :2] = [1.0, -1.0]
GAMMA[3, 0, :3] = [1.0, 0.0, 0.0]
GAMMA[3, 1, :3] = [1.5, -2.0, 0.5]
GAMMA[3, 2, :3] = [1.0, -2.0, 1.0]
GAMMA[4, 0, :4] = [1.0, 0.0, 0.0, 0.0]
GAMMA[4, 1, :4] = [11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0]
GAMMA[4, 2, :4] = [2.0, -5.0, 4.0, -1.0]
GAMMA[4, 3, :4] = [1.0, -3.0, 3.0, -1.0]


def _check_k(k):
    if not 1 <= k <= 4:
        raise ValueError(f"EAB order must be in 1..4, got {k}")


def g_values(history: HistoryWindow, a_n=None) -> list[np.ndarray]:
    """Remainders ``g_{n-j} = b_{n-j} + (a_{n-j} - a_n) y_{n-j}``, newest last."""
    if a_n is None:
        a_n = history.newest.a
    return [s.b + (s.a - a_n) * s.y for s in history.samples]


def gamma_coeffs(k: int, g) -> list[np.ndarray]:
    """Coefficients ``[gamma_n1, ..., gamma_nk]`` from ``g`` (oldest first, length k)."""
    _check_k(k)
    if len(g) != k:
        raise ValueError(f"need exactly {k} g values, got {len(g)}")
    newest_first = [np.asarray(x, dtype=float) for x in reversed(g)]
    return [sum(GAMMA[k, j, i] * newest_first[i] for i in range(k)) for j in range(k)]


@njit(cache=True, error_model="numpy")
def eab_update(k, h, Y, A, B, out):
    n = k - 1
    N = Y.shape[1]
    g = np.empty(k)
    ph = np.empty(k + 1)
    for i in range(N):
        an = A[n, i]
        x = an * h
        for m in range(k):
            row = n - m
            g[m] = B[row, i] + (A[row, i] - an) * Y[row, i]
        if abs(x) < TAYLOR_RADIUS:
            # w-recursion: one phi_k evaluation, no cancellation for small |x|
            w = an * Y[n, i] + B[n, i]
            acc = 0.0
            for j in range(1, k):
                acc += w * INV_FACT[j]
                gam = 0.0
                for m in range(k):
                    gam += GAMMA[k, j, m] * g[m]
                w = gam + x * w
            acc += phi_scalar(k, x) * w
            out[i] = Y[n, i] + h * acc
        else:
            # the w_j grow like |x|^j here, so use the direct sum instead
            _phi_fill(k, x, ph)
            acc = 0.0
            for j in range(k):
                gam = 0.0
                for m in range(k):
                    gam += GAMMA[k, j, m] * g[m]
                acc += ph[j + 1] * gam
            out[i] = ph[0] * Y[n, i] + h * acc


def eab_step(k: int, h: float, history: HistoryWindow) -> np.ndarray:
    """One EAB_k step from a full history with spacing ``h``."""
    _check_k(k)
    history.require(k, h)
    Y, A, B = history.arrays()
    out = np.empty(Y.shape[1])
    eab_update(k, h, Y, A, B, out)
    return check_finite(out)


def eab_step_direct(k: int, h: float, history: HistoryWindow) -> np.ndarray:
    """EAB_k step evaluated literally as ``e^{ah} y_n + h sum phi_j gamma_j``.

    Slower than :func:`eab_step`; kept as an independent check of the
    recursion form.
    """
    _check_k(k)
    history.require(k, h)
    s = history.newest
    gammas = gamma_coeffs(k, g_values(history, s.a))
    phis = phi_diag(k, s.a, h)
    y = phis[0] * s.y + h * sum(phis[j + 1] * gammas[j] for j in range(k))
    return check_finite(y)


def bootstrap(scheme: SchemeSpec, system: SplitSystem, y0, h: float, t0: float = 0.0) -> HistoryWindow:
    """Startup values ``y_0..y_{k-1}`` by RK4 at step ``h``, with a and b cached."""
    from .classical import rk4_step

    k = scheme.steps
    y = check_finite(np.asarray(y0, dtype=float))
    hist = HistoryWindow(k).push(make_sample(system, t0, y))
    for n in range(1, k):
        y = rk4_step(h, t0 + (n - 1) * h, y, system)
        hist = hist.push(make_sample(system, t0 + n * h, y))
    return hist
