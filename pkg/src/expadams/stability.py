"""Linear stability of EAB_k on the theta-split test equation, and the
positivity bounds of EAB2 / EAB3 on scalar relaxation equations.

For ``y' = lam*y`` split as ``a = theta*lam`` and ``g = (1-theta)*lam*y``, one
EAB_k step is a linear recurrence in ``y``.  Its characteristic polynomial
``xi^k + c_1 xi^(k-1) + ... + c_k`` is assembled from the same gamma table the
solver uses, and ``rho`` is the largest root modulus.  ``z = lam*h``.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .core import BracketError
from .eab import GAMMA, eab_update
from .phi import phi_array, phi_upto


@dataclass(frozen=True)
class StabilityQuery:
    k: int
    theta: float
    z: complex

    def __post_init__(self):
        if self.k not in (2, 3, 4):
            raise ValueError(f"k must be 2, 3 or 4, got {self.k}")
        if not self.theta > 0:
            raise ValueError("theta must be positive")

    def rho(self) -> float:
        return float(rho(self.k, self.theta, self.z))


@dataclass(frozen=True)
class GridSpec:
    """Real segment ``[x0, x1]`` (``y0 = y1 = 0``) or rectangle ``[x0, x1] x [y0, y1]``."""

    x0: float
    x1: float
    dx: float
    y0: float = 0.0
    y1: float = 0.0

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("grid spacing must be positive")
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError("grid bounds must be ordered")

    @staticmethod
    def _axis(lo, hi, dx):
        n = int(round((hi - lo) / dx))
        return np.linspace(lo, hi, n + 1) if n > 0 else np.array([lo])

    @property
    def re(self) -> np.ndarray:
        return self._axis(self.x0, self.x1, self.dx)

    @property
    def im(self) -> np.ndarray:
        return self._axis(self.y0, self.y1, self.dx)

    @classmethod
    def real_axis(cls, z_min: float = -30.0, dx: float = 0.01) -> "GridSpec":
        return cls(z_min, 0.0, dx)

    @classmethod
    def default_plane(cls, dx: float = 0.05) -> "GridSpec":
        return cls(-40.0, 2.0, dx, 0.0, 60.0)


def stability_poly_coeffs(k: int, theta: float, z) -> np.ndarray:
    """``[c_1, ..., c_k]`` of the characteristic polynomial, shape ``(k,) + z.shape``.

    With ``T = GAMMA[k]``::

        c_1     = -exp(theta z) - (1 - theta) z sum_j phi_j(theta z) T[j, 0]
        c_{i+1} =               - (1 - theta) z sum_j phi_j(theta z) T[j, i]
    """
    StabilityQuery(k, theta, 0j)
    z = np.asarray(z, dtype=complex)
    ph = phi_array(k, theta * z)
    T = GAMMA[k, :k, :k]
    # S[i] = sum_j phi_j T[j-1, i]
    S = np.tensordot(T.T, ph[1:], axes=(1, 0))
    c = -(1.0 - theta) * z * S
    c[0] -= ph[0]
    return c


def _roots_max_modulus(c: np.ndarray) -> np.ndarray:
    k = c.shape[0]
    flat = c.reshape(k, -1)
    if k == 1:
        return np.abs(flat[0]).reshape(c.shape[1:])
    if k == 2:
        c1, c2 = flat
        d = np.sqrt(c1 * c1 - 4.0 * c2)
        r = np.maximum(np.abs(-c1 + d), np.abs(-c1 - d)) / 2.0
        return r.reshape(c.shape[1:])
    m = flat.shape[1]
    comp = np.zeros((m, k, k), dtype=complex)
    comp[:, 0, :] = -flat.T
    comp[:, np.arange(1, k), np.arange(k - 1)] = 1.0
    return np.abs(np.linalg.eigvals(comp)).max(axis=1).reshape(c.shape[1:])


def rho(k: int, theta: float, z):
    """Stability function: largest root modulus; scalar in, float out."""
    c = stability_poly_coeffs(k, theta, z)
    r = _roots_max_modulus(c)
    return float(r) if np.ndim(r) == 0 else r


def scan_a0(k: int, theta: float, grid: GridSpec | None = None) -> bool:
    """True iff ``rho < 1`` at every node ``z < 0`` of the real grid."""
    grid = grid or GridSpec.real_axis()
    z = grid.re
    z = z[z < 0]
    return bool(np.all(rho(k, theta, z) < 1.0))


@dataclass(frozen=True)
class ThetaThresholds:
    """Brackets ``(unstable, stable)`` / ``(stable, unstable)`` around the A(0) limits."""

    k: int
    lower: tuple[float, float]
    upper: tuple[float, float] | None

    @property
    def interval(self) -> tuple[float, float | None]:
        return self.lower[1], None if self.upper is None else self.upper[0]


def _bisect_theta(k, stable, unstable, tol, grid):
    while abs(stable - unstable) > tol:
        mid = 0.5 * (stable + unstable)
        if scan_a0(k, mid, grid):
            stable = mid
        else:
            unstable = mid
    return stable, unstable


def find_theta_thresholds(k: int, interval: tuple[float, float] = (0.5, 2.5), tol: float = 1e-3,
                          grid: GridSpec | None = None) -> ThetaThresholds:
    """Bisect the A(0) stability limits in ``theta`` on either side of ``theta = 1``.

    ``theta = 1`` (the exact split) is stable.  The low end of ``interval``
    must be unstable or :class:`BracketError` is raised.  If the high end is
    stable, no upper limit is reported.
    """
    lo, hi = interval
    if not 0 < lo < 1 < hi:
        raise ValueError("interval must satisfy 0 < lo < 1 < hi")
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = grid or GridSpec.real_axis()
    if scan_a0(k, lo, grid):
        raise BracketError(f"k={k}: theta={lo} is already A(0) stable on the grid")
    s, u = _bisect_theta(k, 1.0, lo, tol, grid)
    lower = (u, s)
    upper = None
    if not scan_a0(k, hi, grid):
        s, u = _bisect_theta(k, 1.0, hi, tol, grid)
        upper = (s, u)
    return ThetaThresholds(k, lower, upper)


def stability_grid(k: int, theta: float, grid: GridSpec | None = None, workers: int = 1):
    """``rho`` on every node of a rectangle; returns ``(re, im, R)`` with ``R[i_im, i_re]``.

    Rows are independent and may be evaluated on ``workers`` threads; the
    result does not depend on the worker count.
    """
    grid = grid or GridSpec.default_plane()
    re, im = grid.re, grid.im

    def row(y):
        return rho(k, theta, re + 1j * y)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(row, im))
    else:
        rows = [row(y) for y in im]
    return re, im, np.vstack(rows)


def write_grid_csv(path, re, im, R) -> Path:
    """Write ``re_z,im_z,rho`` rows (imaginary part outer, real part inner)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["re_z", "im_z", "rho"])
        for i, y in enumerate(im):
            for j, x in enumerate(re):
                w.writerow([f"{x:.15g}", f"{y:.15g}", f"{R[i, j]:.15g}"])
    return path


def estimate_alpha(re, im, R) -> float:
    """Largest wedge half-angle (degrees) around the negative real axis free of
    unstable grid nodes.  Descriptive only: limited by the grid extent."""
    X, Y = np.meshgrid(re, im)
    bad = (R >= 1.0) & (X < 0)
    if not bad.any():
        return 90.0
    return float(np.degrees(np.arctan2(Y[bad], -X[bad]).min()))


# --- positivity -----------------------------------------------------------

def _check_a(a, K1, K2):
    if a > 0:
        raise ValueError("stabilizer must be non-positive")
    if K1 > K2:
        raise ValueError("need K1 <= K2")


def positivity_constant_eab2(a: float, h: float) -> float:
    x = a * h
    p = phi_upto(2, x)
    return float(p[0] + x * p[2])


def positivity_check_eab2(h: float, a: float, y1: float, b0: float, K1: float, K2: float) -> bool:
    """Sufficient condition for one EAB2 step to stay in ``[K1, K2]``."""
    _check_a(a, K1, K2)
    if a != 0 and h > 1.0 / abs(a):
        return False
    p = phi_upto(2, a * h)
    cp = p[0] + a * h * p[2]
    mid = p[0] * y1 - h * p[2] * b0
    return bool(cp * K1 <= mid <= cp * K2)


def psi(z: float) -> float:
    """``phi_1 e^z + phi_2 (3/2 e^z - 2) + phi_3 (e^z - 2)``; its first zero on
    the negative axis sets the EAB3 step bound."""
    p = phi_upto(3, z)
    e = p[0]
    return float(p[1] * e + p[2] * (1.5 * e - 2.0) + p[3] * (e - 2.0))


def compute_beta3(tol: float = 1e-10, ds: float = 1e-3, s_max: float = 10.0) -> float:
    """First ``s > 0`` with ``psi(-s) = 0``: scan with step ``ds``, then bisect."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if psi(0.0) < 0:
        raise BracketError("psi(0) is negative")
    lo = 0.0
    s = ds
    while psi(-s) >= 0:
        lo = s
        s += ds
        if s > s_max:
            raise BracketError(f"psi(-s) has no sign change on [0, {s_max}]")
    hi = s
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if psi(-mid) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


@lru_cache(maxsize=1)
def beta3() -> float:
    return compute_beta3()


def positivity_check_eab3(h: float, a: float, y2: float, b1: float, K1: float, K2: float) -> bool:
    """Sufficient condition for one EAB3 step to stay in ``[K1, K2]``."""
    _check_a(a, K1, K2)
    if a != 0 and h > beta3() / abs(a):
        return False
    p = phi_upto(3, a * h)
    s = p[2] + p[3]
    cp = p[0] + 2.0 * a * h * s
    mid = p[0] * y2 - 2.0 * h * s * b1
    return bool(cp * K1 <= mid <= cp * K2)


@dataclass(frozen=True)
class PositivityReport:
    h_factor: float | None
    trials: int
    admitted: int
    admitted_violations: int
    violations: int
    y_min: float
    y_max: float


def _gate_forcing(rng, n_trials, n_steps):
    """Equilibrium values ``w_inf(t_n)`` in [0, 1]: iid noise, square waves
    of random period, and slow sinusoids, one pattern per trial."""
    mode = rng.integers(0, 3, n_trials)
    n = np.arange(n_steps)[:, None]
    noise = rng.random((n_steps, n_trials))
    period = rng.integers(1, 6, n_trials)[None, :]
    square = ((n // period) % 2).astype(float)
    freq = rng.uniform(0.01, 0.5, n_trials)[None, :]
    phase = rng.uniform(0, 2 * np.pi, n_trials)[None, :]
    sine = 0.5 + 0.5 * np.sin(freq * n + phase)
    return np.where(mode == 0, noise, np.where(mode == 1, square, sine))


def positivity_trials(taus, h_factor: float | None = None, n_trials: int = 2000, n_steps: int = 200,
                      seed: int = 0, tol: float = 1e-12) -> PositivityReport:
    """EAB2 on ``y' = (w_inf(t) - y) / tau`` for many random gates.

    ``a = -1/tau`` is constant and ``b = w_inf / tau`` lies in ``[0, -a]``, so
    the exact solution stays in [0, 1].  The step is ``h_factor * tau``, or a
    random fraction of ``tau`` in (0, 1] when ``h_factor`` is None.  ``y_0``
    is random in [0, 1] and ``y_1`` comes from an exact step with ``b_0``
    frozen.  ``admitted`` counts trials passing :func:`positivity_check_eab2`;
    a violation is any ``y_n`` outside ``[-tol, 1 + tol]``.
    """
    rng = np.random.default_rng(seed)
    taus = np.asarray(taus, dtype=float).ravel()
    tau = rng.choice(taus, n_trials)
    a = -1.0 / tau
    frac = rng.uniform(0.01, 1.0, n_trials) if h_factor is None else np.full(n_trials, float(h_factor))
    h = frac * tau
    w = _gate_forcing(rng, n_trials, n_steps + 1)
    b = -a * w
    y = np.empty((n_steps + 1, n_trials))
    y[0] = rng.random(n_trials)
    e = np.exp(a * h)
    y[1] = e * y[0] + (1.0 - e) * w[0]
    admitted = np.array([positivity_check_eab2(h[i], a[i], y[1, i], b[0, i], 0.0, 1.0)
                         for i in range(n_trials)])
    Y = np.empty((2, 1))
    A = np.empty((2, 1))
    B = np.empty((2, 1))
    out = np.empty(1)
    for i in range(n_trials):
        A[:, 0] = a[i]
        for n in range(1, n_steps):
            Y[:, 0] = y[n - 1:n + 1, i]
            B[:, 0] = b[n - 1:n + 1, i]
            eab_update(2, h[i], Y, A, B, out)
            y[n + 1, i] = out[0]
    bad = ((y < -tol) | (y > 1.0 + tol)).any(axis=0)
    return PositivityReport(h_factor, n_trials, int(admitted.sum()), int((bad & admitted).sum()),
                            int(bad.sum()), float(y.min()), float(y.max()))


def alpha_degrees_from_rho(k: int, theta: float, dx: float = 0.05) -> float:
    """Convenience: grid + :func:`estimate_alpha` on the default rectangle."""
    return estimate_alpha(*stability_grid(k, theta, GridSpec.default_plane(dx)))


__all__ = [
    "StabilityQuery", "GridSpec", "ThetaThresholds", "stability_poly_coeffs", "rho", "scan_a0",
    "find_theta_thresholds", "stability_grid", "write_grid_csv", "estimate_alpha",
    "positivity_constant_eab2", "positivity_check_eab2", "positivity_check_eab3", "psi",
    "compute_beta3", "beta3", "alpha_degrees_from_rho", "PositivityReport", "positivity_trials",
]
