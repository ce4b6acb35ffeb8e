"""Evaluation of the phi-functions of exponential integrators.

``phi_0(z) = exp(z)`` and ``phi_{j+1}(z) = (phi_j(z) - 1/j!) / z``, with
``phi_j(0) = 1/j!``.  Near the origin the recursion cancels badly, so a
truncated Taylor series is used inside ``TAYLOR_RADIUS`` and the recursion
outside it.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MAX_ORDER = 4

# Below this modulus the Taylor series is used.  The recursion loses about
# log10(1/|z|) digits per order, so for phi_4 the switch has to sit at |z| ~ 1
# to keep 1e-12 relative accuracy on both sides.
TAYLOR_RADIUS = 1.0
N_TAYLOR = 26

INV_FACT = np.array([1.0 / math.factorial(m) for m in range(N_TAYLOR + MAX_ORDER + 1)])


@njit(cache=True, error_model="numpy")
def _phi_fill(k, z, out):
    if abs(z) < TAYLOR_RADIUS:
        for j in range(k + 1):
            s = z * 0.0
            for m in range(N_TAYLOR - 1, -1, -1):
                s = s * z + INV_FACT[m + j]
            out[j] = s
    else:
        out[0] = np.exp(z)
        for j in range(k):
            out[j + 1] = (out[j] - INV_FACT[j]) / z


@njit(cache=True, error_model="numpy")
def phi_scalar(k, x):
    """phi_k(x) for a real scalar; the solver hot path."""
    if abs(x) < TAYLOR_RADIUS:
        s = 0.0
        for m in range(N_TAYLOR - 1, -1, -1):
            s = s * x + INV_FACT[m + k]
        return s
    p = math.exp(x)
    for j in range(k):
        p = (p - INV_FACT[j]) / x
    return p


@njit(cache=True, error_model="numpy")
def _phi_table(k, z, out):
    buf = np.empty(k + 1, dtype=out.dtype)
    for i in range(z.shape[0]):
        _phi_fill(k, z[i], buf)
        for j in range(k + 1):
            out[j, i] = buf[j]


def _check_order(k):
    if not 0 <= k <= MAX_ORDER:
        raise ValueError(f"phi order must be in 0..{MAX_ORDER}, got {k}")


def phi_upto(k: int, z: complex) -> np.ndarray:
    """Return ``[phi_0(z), ..., phi_k(z)]`` for a scalar ``z``.

    The result is real when ``z`` is real and complex otherwise.

    >>> phi_upto(2, 0.0)
    array([1. , 1. , 0.5])
    """
    _check_order(k)
    if isinstance(z, (complex, np.complexfloating)):
        out = np.empty(k + 1, dtype=np.complex128)
        _phi_fill(k, complex(z), out)
    else:
        out = np.empty(k + 1, dtype=np.float64)
        _phi_fill(k, float(z), out)
    return out


def phi_array(k: int, z) -> np.ndarray:
    """Vectorised ``phi_upto``: returns shape ``(k + 1,) + z.shape``."""
    _check_order(k)
    z = np.asarray(z)
    dtype = np.complex128 if np.iscomplexobj(z) else np.float64
    flat = np.ascontiguousarray(z, dtype=dtype).ravel()
    out = np.empty((k + 1, flat.size), dtype=dtype)
    _phi_table(k, flat, out)
    return out.reshape((k + 1,) + z.shape)


def phi_diag(k: int, diag, h: float) -> np.ndarray:
    """phi_0..phi_k of ``diag * h`` entrywise, shape ``(k + 1, N)``.

    Row ``j`` holds ``phi_j(diag_i * h)``; zero entries give ``1/j!``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    return phi_array(k, np.asarray(diag, dtype=float) * h)
