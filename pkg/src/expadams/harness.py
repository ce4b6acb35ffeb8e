"""Experiment drivers: trajectories, projection on a reference grid, error
metric, convergence studies and critical time step search."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _march
from .classical import NewtonConfig, ab_step, bdf_solve, rk4_step
from .core import (BracketError, Family, HistoryWindow, SchemeSpec, SolverFailure, SplitSystem, StepOverflow,
                   make_sample)
from .eab import bootstrap, eab_step
from .ieab import ieab_step

log = logging.getLogger(__name__)

_FAST_FAMILY = {
    Family.EAB: _march.FAM_EAB,
    Family.IEAB: _march.FAM_IEAB,
    Family.AB: _march.FAM_AB,
    Family.RK4: _march.FAM_RK4,
}


@dataclass
class RunRecord:
    scheme: SchemeSpec
    h: float
    times: np.ndarray
    states: np.ndarray  # (n_recorded, len(components))
    components: tuple[int, ...]
    overflowed: bool = False
    solver_failures: int = 0
    wall_time: float = 0.0
    steps_requested: int = 0

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    @property
    def completed(self) -> bool:
        return not self.overflowed and self.steps == self.steps_requested

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class ErrorReport:
    scheme: SchemeSpec
    h: float
    e_h: float
    order: float | None = None
    overflowed: bool = False


def n_steps_for(T: float, h: float) -> int:
    ratio = T / h
    n = round(ratio)
    return int(n) if abs(ratio - n) < 1e-9 * max(1.0, ratio) else int(math.floor(ratio))


def integrate(scheme: SchemeSpec, system: SplitSystem, y0, h: float, T: float, *,
              components=None, t0: float = 0.0, newton: NewtonConfig = NewtonConfig(),
              fast: bool = True) -> RunRecord:
    """Bootstrap and step from ``t0`` to ``t0 + T`` with fixed step ``h``.

    Overflow and nonlinear-solver failure stop the run early with
    ``overflowed=True``; they are recorded, never raised.  ``components``
    selects the state entries to keep (all by default).
    """
    if not (h > 0 and T > 0):
        raise ValueError("h and T must be positive")
    y0 = np.asarray(y0, dtype=float)
    keep = tuple(range(system.dim)) if components is None else tuple(int(c) for c in components)
    n = n_steps_for(T, h)
    start = time.perf_counter()
    use_fast = fast and system.kernel is not None and scheme.family in _FAST_FAMILY
    if use_fast:
        rec, done, bad = _march.march(_FAST_FAMILY[scheme.family], scheme.steps, system.kernel,
                                      system.params, y0, float(t0), float(h), n,
                                      np.array(keep, dtype=np.int64))
        record = RunRecord(scheme, h, t0 + h * np.arange(done + 1), rec, keep, overflowed=bool(bad),
                           steps_requested=n)
    else:
        record = _integrate_python(scheme, system, y0, h, n, t0, keep, newton)
    record.wall_time = time.perf_counter() - start
    return record


def _integrate_python(scheme, system, y0, h, n, t0, keep, newton):
    k = scheme.steps
    idx = list(keep)
    states = [y0[idx]]
    failures = 0
    overflow = False
    try:
        hist = bootstrap(scheme, system, y0, h, t0) if k > 1 else HistoryWindow(1).push(
            make_sample(system, t0, y0))
        for s in hist.samples[1:n + 1]:
            states.append(s.y[idx])
        y = hist.newest.y
        for m in range(len(hist.samples) - 1, n):
            t = t0 + m * h
            fam = scheme.family
            if fam is Family.RK4:
                y = rk4_step(h, t, y, system)
            elif fam is Family.EAB:
                y = eab_step(k, h, hist)
            elif fam is Family.IEAB:
                y = ieab_step(k, h, hist)
            elif fam is Family.AB:
                y = ab_step(k, h, y, [s.a * s.y + s.b for s in hist.samples])
            else:
                y = bdf_solve(k, h, hist, system, newton)[0]
            states.append(y[idx])
            if fam is not Family.RK4:
                hist = hist.push(make_sample(system, t0 + (m + 1) * h, y))
    except StepOverflow:
        overflow = True
    except SolverFailure:
        failures += 1
        overflow = True
    done = len(states) - 1
    return RunRecord(scheme, h, t0 + h * np.arange(done + 1), np.array(states), tuple(keep),
                     overflowed=overflow, solver_failures=failures, steps_requested=n)


def _refinement(h: float, h_ref: float) -> int:
    r = h / h_ref
    ri = int(round(r))
    if ri < 1 or abs(r - ri) > 1e-9 * r or ri & (ri - 1):
        raise ValueError(f"h={h} is not a power-of-two multiple of h_ref={h_ref}")
    return ri


def _cubic_basis(s):
    s = np.asarray(s, dtype=float)[:, None]
    nodes = np.arange(4.0)
    L = np.ones((s.shape[0], 4))
    for i in range(4):
        for m in range(4):
            if m != i:
                L[:, i] *= (s[:, 0] - nodes[m]) / (nodes[i] - nodes[m])
    return L


def project_cubic(run: RunRecord, h_ref: float) -> np.ndarray:
    """Piecewise-cubic projection of a run onto the grid ``n * h_ref``.

    Each block of three steps ``(t_{3n}, t_{3n+3})`` is replaced by the cubic
    through its four nodes.  When the step count is not a multiple of three
    the remaining one or two steps use the cubic through the last four nodes,
    so the projection always covers ``[t_0, t_M]`` with ``M*r + 1`` samples.
    Returns an array of shape ``(M*r + 1, n_components)``.
    """
    r = _refinement(run.h, h_ref)
    Y = np.asarray(run.states, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    M = Y.shape[0] - 1
    if r == 1:
        return Y.copy()
    if M < 3:
        raise ValueError("cubic projection needs at least three steps")
    nb = M // 3
    out = np.empty((M * r + 1, Y.shape[1]))
    L = _cubic_basis(np.arange(3 * r) / r)
    blocks = np.stack([Y[3 * b:3 * b + 4] for b in range(nb)])  # (nb, 4, C)
    out[:3 * nb * r] = np.einsum("si,bic->bsc", L, blocks).reshape(-1, Y.shape[1])
    tail = np.arange(3 * nb * r, M * r + 1)
    Lt = _cubic_basis(tail / r - (M - 3))
    out[3 * nb * r:] = Lt @ Y[M - 3:M + 1]
    return out


def error_metric(projected, reference) -> float:
    """``max |v_ref - P(v)| / max |v_ref|`` over the last component."""
    P = np.asarray(projected, dtype=float)
    R = np.asarray(reference, dtype=float)
    if P.ndim == 2:
        P = P[:, -1]
    if R.ndim == 2:
        R = R[:, -1]
    if P.shape != R.shape:
        raise ValueError(f"projection has {P.shape[0]} samples, reference {R.shape[0]}")
    if not np.all(np.isfinite(P)):
        return math.inf
    return float(np.max(np.abs(R - P)) / np.max(np.abs(R)))


@dataclass
class ReferenceSolution:
    h_ref: float
    T: float
    v: np.ndarray
    wall_time: float = 0.0


def reference_solution(system: SplitSystem, y0, h_ref: float, T: float) -> ReferenceSolution:
    run = integrate(SchemeSpec(Family.RK4, 4), system, y0, h_ref, T, components=[system.dim - 1])
    if not run.completed:
        raise StepOverflow("reference RK4 run failed; decrease h_ref")
    return ReferenceSolution(h_ref, T, run.states[:, 0], run.wall_time)


def score_run(run: RunRecord, ref: ReferenceSolution) -> float:
    if not run.completed:
        return math.inf
    return error_metric(project_cubic(run, ref.h_ref)[:, -1], ref.v)


def convergence_study(schemes, system: SplitSystem, y0, h_list, T: float, h_ref: float | None = None,
                      *, reference: ReferenceSolution | None = None, workers: int = 1) -> list[ErrorReport]:
    """Errors of every ``(scheme, h)`` pair against one RK4 reference run.

    ``h_ref`` defaults to ``min(h_list) / 16``.  ``order`` is
    ``log2(e(2h) / e(h))`` when ``2h`` is also in ``h_list``.  Runs may execute
    on ``workers`` threads; the output order is always scheme-major, then
    ``h_list`` order.
    """
    h_list = [float(h) for h in h_list]
    if reference is None:
        h_ref = h_ref or min(h_list) / 16
        reference = reference_solution(system, y0, h_ref, T)
    for h in h_list:
        _refinement(h, reference.h_ref)
    jobs = [(s, h) for s in schemes for h in h_list]

    def one(job):
        s, h = job
        run = integrate(s, system, y0, h, T, components=[system.dim - 1])
        e = score_run(run, reference)
        log.info("%s h=%g e=%.3e (%.2fs)", s.label, h, e, run.wall_time)
        return ErrorReport(s, h, e, overflowed=run.overflowed)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(one, jobs))
    else:
        reports = [one(j) for j in jobs]
    by_key = {(r.scheme, r.h): r for r in reports}
    for r in reports:
        coarse = by_key.get((r.scheme, 2 * r.h))
        if coarse is not None and 0 < r.e_h < math.inf and 0 < coarse.e_h < math.inf:
            r.order = math.log2(coarse.e_h / r.e_h)
    return reports


def critical_time_step(scheme: SchemeSpec, system: SplitSystem, y0, T: float, h_lo: float, h_hi: float,
                       tol: float, *, rtol: float = 0.0, scan_ratio: float | None = None,
                       newton: NewtonConfig = NewtonConfig()) -> float:
    """Largest step that integrates to ``T`` without overflow or solver failure.

    Bisects between ``h_lo`` (must succeed) and ``h_hi`` (must fail) until the
    bracket is narrower than ``max(tol, rtol * h_hi)``; returns its midpoint.  Failure need not
    be monotone in ``h``: with ``scan_ratio`` the steps
    ``h_lo * scan_ratio**i`` are tried first and the bisection starts from the
    first failing one, so the result approximates the *first* failure.
    """
    def ok(h):
        return integrate(scheme, system, y0, h, T, components=[system.dim - 1], newton=newton).completed

    if not 0 < h_lo < h_hi:
        raise BracketError("need 0 < h_lo < h_hi")
    if not ok(h_lo):
        raise BracketError(f"{scheme.label}: run at h_lo={h_lo} already fails")
    if scan_ratio is not None:
        if not scan_ratio > 1:
            raise ValueError("scan_ratio must exceed 1")
        h = h_lo * scan_ratio
        while h < h_hi:
            if not ok(h):
                h_hi = h
                break
            h_lo = h
            h *= scan_ratio
    if h_hi - h_lo > 0 and ok(h_hi):
        raise BracketError(f"{scheme.label}: run at h_hi={h_hi} does not fail")
    while h_hi - h_lo > max(tol, rtol * h_hi):
        mid = 0.5 * (h_lo + h_hi)
        if ok(mid):
            h_lo = mid
        else:
            h_hi = mid
    return 0.5 * (h_lo + h_hi)
