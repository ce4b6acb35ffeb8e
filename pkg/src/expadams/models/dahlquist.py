"""The theta-split Dahlquist test problem ``y' = lam*y = (theta*lam) y + (1-theta) lam y``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core import SplitSystem

# r = theta / (1 - theta) is infinite for the exact split theta = 1.
EXACT_SPLIT = math.inf


@dataclass(frozen=True)
class DahlquistSplit:
    lam: complex
    theta: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")


@njit(cache=True, error_model="numpy")
def dahlquist_kernel(t, y, p, a, b):
    a[0] = p[1] * p[0]
    b[0] = (1.0 - p[1]) * p[0] * y[0]


def make_dahlquist(lam, theta: float = 1.0) -> SplitSystem:
    """Split system with stabilizer ``theta*lam`` and remainder ``(1-theta)*lam*y``."""
    spec = DahlquistSplit(lam, theta)
    is_complex = isinstance(lam, complex) and lam.imag != 0
    dtype = complex if is_complex else float
    lam_c = dtype(spec.lam)

    def eval_ab(t, y):
        y = np.asarray(y)
        return np.full(1, theta * lam_c, dtype=dtype), (1.0 - theta) * lam_c * y

    def eval_f(t, y):
        return lam_c * np.asarray(y)

    kernel = params = None
    if not is_complex:
        kernel, params = dahlquist_kernel, np.array([float(lam_c), float(theta)])
    return SplitSystem(1, eval_ab, eval_f, name=f"dahlquist(lam={lam}, theta={theta})",
                       kernel=kernel, params=params)


def theta_from_r(r: float) -> float:
    """Map the alternative splitting parameter ``r`` to ``theta = r / (1 + r)``."""
    if math.isinf(r):
        return 1.0
    if r == -1:
        raise ValueError("r = -1 has no theta")
    return r / (1.0 + r)


def r_from_theta(theta: float) -> float:
    """Inverse of :func:`theta_from_r`; ``theta = 1`` gives :data:`EXACT_SPLIT`."""
    if theta == 1:
        return EXACT_SPLIT
    return theta / (1.0 - theta)
