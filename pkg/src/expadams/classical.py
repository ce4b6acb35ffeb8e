"""Classical baselines: Adams-Bashforth, BDF (Newton-solved) and RK4."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import HistoryWindow, SolverFailure, SplitSystem, check_finite

# AB_COEFFS[k, i] weights f_{n-i}.
AB_COEFFS = np.zeros((5, 4))
AB_COEFFS[1, :1] = [1.0]
AB_COEFFS[2, :2] = [1.5, -0.5]
AB_COEFFS[3, :3] = np.array([23.0, -16.0, 5.0]) / 12.0
AB_COEFFS[4, :4] = np.array([55.0, -59.0, 37.0, -9.0]) / 24.0

# y_{n+1} = sum_i BDF_COEFFS[k, i] y_{n-i} + BDF_BETA[k] h f(t_{n+1}, y_{n+1})
BDF_COEFFS = np.zeros((5, 4))
BDF_COEFFS[2, :2] = [4.0 / 3.0, -1.0 / 3.0]
BDF_COEFFS[3, :3] = [18.0 / 11.0, -9.0 / 11.0, 2.0 / 11.0]
BDF_COEFFS[4, :4] = [48.0 / 25.0, -36.0 / 25.0, 16.0 / 25.0, -3.0 / 25.0]
BDF_BETA = np.array([0.0, 0.0, 2.0 / 3.0, 6.0 / 11.0, 12.0 / 25.0])


@njit(cache=True, error_model="numpy")
def ab_update(k, h, y_n, F, out):
    # F rows oldest first
    for i in range(y_n.shape[0]):
        s = 0.0
        for m in range(k):
            s += AB_COEFFS[k, m] * F[k - 1 - m, i]
        out[i] = y_n[i] + h * s


def ab_step(k: int, h: float, y_n, f_history) -> np.ndarray:
    """Adams-Bashforth step; ``f_history`` holds ``f_{n-k+1}..f_n``, oldest first."""
    if not 1 <= k <= 4:
        raise ValueError(f"AB order must be in 1..4, got {k}")
    F = np.atleast_2d(np.asarray(f_history, dtype=float))
    if F.shape[0] != k:
        raise ValueError(f"need {k} f values, got {F.shape[0]}")
    y_n = np.asarray(y_n, dtype=float)
    out = np.empty_like(y_n)
    ab_update(k, h, y_n, F, out)
    return check_finite(out)


def rk4_step(h: float, t: float, y, system: SplitSystem) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    f = system.eval_f
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return check_finite(y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


@dataclass(frozen=True)
class NewtonConfig:
    """Damped Newton settings for the BDF nonlinear solve.

    Convergence is declared when every update component satisfies
    ``|dy_i| <= abs_tol + rel_tol * |y_i|``.
    """

    max_iters: int = 25
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    jacobian_fd_eps: float = 1.5e-8
    max_halvings: int = 10

    def __post_init__(self):
        if self.max_iters < 1 or self.abs_tol <= 0 or self.rel_tol <= 0 or self.jacobian_fd_eps <= 0:
            raise ValueError("Newton iteration cap and tolerances must be positive")


def fd_jacobian(fun, t, y, f0, eps):
    n = y.size
    J = np.empty((n, n))
    for j in range(n):
        dy = eps * max(abs(y[j]), 1.0)
        yp = y.copy()
        yp[j] += dy
        J[:, j] = (fun(t, yp) - f0) / dy
    return J


def bdf_solve(k: int, h: float, history: HistoryWindow, system: SplitSystem,
              newton: NewtonConfig = NewtonConfig()):
    """BDF_k step; returns ``(y_{n+1}, newton_iterations)``.

    Raises :class:`SolverFailure` when Newton does not converge.
    """
    if not 2 <= k <= 4:
        raise ValueError(f"BDF order must be in 2..4, got {k}")
    history.require(k, None)
    ys = [s.y for s in history.samples]
    h_hist = history.spacing()
    if h_hist is not None and abs(h_hist - h) > 1e-9 * h:
        raise ValueError("history spacing does not match h")
    t1 = history.newest.t + h
    const = sum(BDF_COEFFS[k, i] * ys[-1 - i] for i in range(k))
    bh = BDF_BETA[k] * h
    fun = system.eval_f
    eye = np.eye(system.dim)

    def residual(y):
        return y - const - bh * fun(t1, y)

    y = 2.0 * ys[-1] - ys[-2]
    r = residual(y)
    if not np.all(np.isfinite(r)):
        y = ys[-1].copy()
        r = residual(y)
    for it in range(1, newton.max_iters + 1):
        f0 = (y - const - r) / bh
        J = eye - bh * fd_jacobian(fun, t1, y, f0, newton.jacobian_fd_eps)
        try:
            dy = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure("singular Newton matrix") from exc
        if not np.all(np.isfinite(dy)):
            raise SolverFailure("non-finite Newton update")
        norm0 = np.max(np.abs(r))
        lam = 1.0
        for _ in range(newton.max_halvings):
            y_try = y + lam * dy
            r_try = residual(y_try)
            if np.all(np.isfinite(r_try)) and np.max(np.abs(r_try)) <= norm0:
                break
            lam *= 0.5
        else:
            if not np.all(np.isfinite(r_try)):
                raise SolverFailure("residual not finite along the Newton direction")
        y, r = y_try, r_try
        if np.all(np.abs(lam * dy) <= newton.abs_tol + newton.rel_tol * np.abs(y)):
            return check_finite(y), it
    raise SolverFailure(f"Newton did not converge in {newton.max_iters} iterations")


def bdf_step(k: int, h: float, history: HistoryWindow, system: SplitSystem,
             newton: NewtonConfig = NewtonConfig()) -> np.ndarray:
    return bdf_solve(k, h, history, system, newton)[0]
