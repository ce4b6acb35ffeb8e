"""Integral exponential Adams-Bashforth schemes I-EAB_k, k = 2, 3, 4.

Both ``a`` and ``b`` are replaced by their Lagrange extrapolants over the last
k nodes; the exponential of the primitive of the extrapolated stabilizer is
integrated by Simpson's rule (k = 2, 3) or three-point Gauss (k = 4).  All node
quantities are fixed linear combinations of the history, tabulated below with
the newest sample first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import HistoryWindow, check_finite

_S15 = math.sqrt(15.0)

# Simpson rule, k = 2 and 3: primitive at t_n + h (times h), its increment over
# the second half-step (times h), b at t_n + h and at t_n + h/2.
SIMPSON_G1 = np.array([[1.5, -0.5, 0.0], [23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0]])
SIMPSON_DELTA = np.array([[7.0 / 8.0, -3.0 / 8.0, 0.0], [29.0 / 24.0, -25.0 / 24.0, 8.0 / 24.0]])
SIMPSON_B1 = np.array([[2.0, -1.0, 0.0], [3.0, -3.0, 1.0]])
SIMPSON_BHALF = np.array([[1.5, -0.5, 0.0], [15.0 / 8.0, -10.0 / 8.0, 3.0 / 8.0]])

# Gauss rule, k = 4, nodes t_n + (1 -/+ sqrt(3/5)) h/2 and t_n + h/2.
GAUSS_G1 = np.array([55.0, -59.0, 37.0, -9.0]) / 24.0
GAUSS_G0 = np.array([297.0, -187.0, 107.0, -25.0]) / 384.0
GAUSS_GR = np.array([
    797.0 / 4.0 + 45.0 * _S15,
    -(2233.0 / 12.0 + 47.0 * _S15),
    1373.0 / 12.0 + 29.0 * _S15,
    -(331.0 / 12.0 + 7.0 * _S15),
]) / 200.0
GAUSS_GL = np.array([
    797.0 / 4.0 - 45.0 * _S15,
    -(2233.0 / 12.0 - 47.0 * _S15),
    1373.0 / 12.0 - 29.0 * _S15,
    -(331.0 / 12.0 - 7.0 * _S15),
]) / 200.0
GAUSS_B0 = np.array([35.0, -35.0, 21.0, -5.0]) / 16.0
GAUSS_BR = np.array([
    95.0 + 179.0 * _S15 / 15.0,
    -(107.0 + 119.0 * _S15 / 5.0),
    69.0 + 79.0 * _S15 / 5.0,
    -(17.0 + 59.0 * _S15 / 15.0),
]) / 40.0
GAUSS_BL = np.array([
    95.0 - 179.0 * _S15 / 15.0,
    -(107.0 - 119.0 * _S15 / 5.0),
    69.0 - 79.0 * _S15 / 5.0,
    -(17.0 - 59.0 * _S15 / 15.0),
]) / 40.0


@dataclass(frozen=True)
class IEabNodeValues:
    """Node quantities of one I-EAB step; unused fields are None."""

    g1: np.ndarray
    delta: np.ndarray | None = None
    b1: np.ndarray | None = None
    bhalf: np.ndarray | None = None
    g0: np.ndarray | None = None
    gl: np.ndarray | None = None
    gr: np.ndarray | None = None
    b0: np.ndarray | None = None
    bl: np.ndarray | None = None
    br: np.ndarray | None = None


def _check_k(k):
    if k not in (2, 3, 4):
        raise ValueError(f"I-EAB order must be 2, 3 or 4, got {k}")


def _combine(coeffs, rows):
    return sum(c * r for c, r in zip(coeffs, rows))


def ieab_node_values(k: int, h: float, history: HistoryWindow) -> IEabNodeValues:
    _check_k(k)
    history.require(k)
    Y, A, B = history.arrays()
    a = A[::-1]
    b = B[::-1]
    if k < 4:
        r = k - 2
        return IEabNodeValues(
            g1=h * _combine(SIMPSON_G1[r], a),
            delta=h * _combine(SIMPSON_DELTA[r], a),
            b1=_combine(SIMPSON_B1[r], b),
            bhalf=_combine(SIMPSON_BHALF[r], b),
        )
    return IEabNodeValues(
        g1=h * _combine(GAUSS_G1, a),
        g0=h * _combine(GAUSS_G0, a),
        gl=h * _combine(GAUSS_GL, a),
        gr=h * _combine(GAUSS_GR, a),
        b0=_combine(GAUSS_B0, b),
        bl=_combine(GAUSS_BL, b),
        br=_combine(GAUSS_BR, b),
    )


@njit(cache=True, error_model="numpy")
def _dot_newest_first(c, M, i, k):
    s = 0.0
    for m in range(k):
        s += c[m] * M[k - 1 - m, i]
    return s


@njit(cache=True, error_model="numpy")
def ieab_update(k, h, Y, A, B, out):
    n = k - 1
    N = Y.shape[1]
    if k < 4:
        r = k - 2
        for i in range(N):
            g1 = h * _dot_newest_first(SIMPSON_G1[r], A, i, k)
            dl = h * _dot_newest_first(SIMPSON_DELTA[r], A, i, k)
            b1 = _dot_newest_first(SIMPSON_B1[r], B, i, k)
            bh = _dot_newest_first(SIMPSON_BHALF[r], B, i, k)
            out[i] = math.exp(g1) * (Y[n, i] + B[n, i] * h / 6.0) + (b1 + 4.0 * math.exp(dl) * bh) * h / 6.0
    else:
        for i in range(N):
            g1 = h * _dot_newest_first(GAUSS_G1, A, i, k)
            g0 = h * _dot_newest_first(GAUSS_G0, A, i, k)
            gl = h * _dot_newest_first(GAUSS_GL, A, i, k)
            gr = h * _dot_newest_first(GAUSS_GR, A, i, k)
            b0 = _dot_newest_first(GAUSS_B0, B, i, k)
            bl = _dot_newest_first(GAUSS_BL, B, i, k)
            br = _dot_newest_first(GAUSS_BR, B, i, k)
            # exp(g1 - g_s) rather than exp(g1) * exp(-g_s): the factors
            # over/underflow separately for very stiff rows.
            quad = 5.0 * bl * math.exp(g1 - gl) + 8.0 * b0 * math.exp(g1 - g0) + 5.0 * br * math.exp(g1 - gr)
            out[i] = math.exp(g1) * Y[n, i] + h / 18.0 * quad


def ieab_step(k: int, h: float, history: HistoryWindow) -> np.ndarray:
    """One I-EAB_k step from a full history with spacing ``h``."""
    _check_k(k)
    history.require(k, h)
    Y, A, B = history.arrays()
    out = np.empty(Y.shape[1])
    ieab_update(k, h, Y, A, B, out)
    return check_finite(out)
