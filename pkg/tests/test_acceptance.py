"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines are repeated in the terminal summary) or directly:
``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import mpmath
import numpy as np
import pytest

from expadams.classical import ab_update
from expadams.core import HistoryWindow, Sample, SchemeSpec
from expadams.eab import eab_step, eab_update
from expadams.harness import (convergence_study, critical_time_step, integrate, reference_solution,
                              score_run)
from expadams.models import (beeler_reuter, beeler_reuter_system, gate_time_constants,
                             make_dahlquist)
from expadams.phi import phi_upto
from expadams.stability import (GridSpec, compute_beta3, find_theta_thresholds, positivity_trials,
                                scan_a0, stability_grid, stability_poly_coeffs)

RESULTS: list[str] = []


def report(n, ok, detail, elapsed=None):
    t = "" if elapsed is None else f" [{elapsed:.1f} s]"
    line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {detail}{t}"
    RESULTS.append(line)
    print(line, flush=True)
    return ok


@pytest.fixture(scope="module")
def br():
    model = beeler_reuter()
    return model, beeler_reuter_system(model)


# 1 -------------------------------------------------------------------------

def _phi_oracle(z):
    mpmath.mp.dps = 40
    z = mpmath.mpc(z)
    if abs(z) <= 1:
        return [complex(sum(z ** m / mpmath.factorial(m + j) for m in range(50))) for j in range(5)]
    out = [mpmath.exp(z)]
    for j in range(4):
        out.append((out[-1] - 1 / mpmath.factorial(j)) / z)
    return [complex(v) for v in out]


def test_criterion_01_phi():
    rng = np.random.default_rng(0)
    r = np.concatenate([50 * rng.random(6000) ** 2, rng.uniform(0.9, 1.1, 3000), 50 * rng.random(1000)])
    ang = np.concatenate([rng.uniform(0, 2 * np.pi, 9000), np.where(rng.random(1000) < 0.5, 0.0, np.pi)])
    z = r * np.exp(1j * ang)
    real = np.arange(z.size) >= 9000
    want = np.array([_phi_oracle(x) for x in z])
    t0 = time.perf_counter()
    got = np.array([phi_upto(4, float(x.real)) if is_real else phi_upto(4, complex(x))
                    for x, is_real in zip(z, real)])
    elapsed = time.perf_counter() - t0
    rel = np.max(np.abs(got - want) / np.abs(want))
    ok = rel <= 1e-12 and elapsed < 1.0
    assert report(1, ok, f"phi_0..phi_4 on {z.size} points |z|<=50: max rel err {rel:.2e} (tol 1e-12)", elapsed)


# 2 -------------------------------------------------------------------------

def test_criterion_02_exactness_and_reduction():
    t0 = time.perf_counter()
    worst_exact = 0.0
    for k in (1, 2, 3, 4):
        for lam, h in ((-82.0, 0.01), (-5.0, 0.1), (-1e3, 0.05), (2.0, 0.01)):
            system = make_dahlquist(lam, 1.0)
            hist = HistoryWindow(k)
            for i in range(k):
                y = np.array([math.exp(lam * i * h)])
                hist = hist.push(Sample(i * h, y, *system.eval_ab(i * h, y)))
            for n in range(k, k + 50):
                y = eab_step(k, h, hist)
                want = math.exp(lam * n * h)
                if want > 1e-290:
                    worst_exact = max(worst_exact, abs(y[0] - want) / want)
                hist = hist.push(Sample(n * h, y, *system.eval_ab(n * h, y)))
    rng = np.random.default_rng(2)
    worst_ab = 0.0
    for _ in range(500):
        k = int(rng.integers(1, 5))
        Y, B = rng.normal(size=(k, 4)) * 5, rng.normal(size=(k, 4)) * 5
        h = float(rng.uniform(1e-3, 1.0))
        e, a = np.empty(4), np.empty(4)
        eab_update(k, h, Y, np.zeros((k, 4)), B, e)
        ab_update(k, h, Y[-1], B, a)
        worst_ab = max(worst_ab, np.max(np.abs(e - a) / (1 + np.abs(a))))
    elapsed = time.perf_counter() - t0
    ok = worst_exact <= 1e-12 and worst_ab <= 1e-13 and elapsed < 1.0
    assert report(2, ok, f"theta=1 exactness rel err {worst_exact:.1e} (tol 1e-12); "
                         f"a=0 vs AB_k {worst_ab:.1e} (tol 1e-13)", elapsed)


# 3 -------------------------------------------------------------------------

CONV_H = [0.005, 0.0025, 0.00125, 0.000625]


def test_criterion_03_convergence_orders(br):
    model, system = br
    schemes = [SchemeSpec.parse(s) for s in ("EAB2", "EAB3", "EAB4", "I-EAB2", "I-EAB3", "I-EAB4")]
    t0 = time.perf_counter()
    reports = convergence_study(schemes, system, model.y0, CONV_H, 500.0, h_ref=CONV_H[-1] / 8, workers=4)
    elapsed = time.perf_counter() - t0
    ok = elapsed < 120.0
    parts = []
    for s in schemes:
        orders = [r.order for r in reports if r.scheme == s and r.order is not None]
        good = len(orders) == 3 and all(abs(o - s.order) <= 0.25 for o in orders)
        ok &= good
        parts.append(f"{s.label} " + "/".join(f"{o:.2f}" for o in orders))
    assert report(3, ok, "BR T=500 orders over 3 halvings: " + ", ".join(parts), elapsed)


# 4 -------------------------------------------------------------------------

TARGET_ACCURACY = {
    "AB2": 5.32e-6, "AB3": 4.33e-8, "AB4": 8.69e-10,
    "I-EAB2": 8.55e-6, "I-EAB3": 4.44e-8, "I-EAB4": 7.30e-10,
    "EAB2": 7.90e-6, "EAB3": 7.00e-8, "EAB4": 1.16e-9,
}


def test_criterion_04_accuracy_table(br):
    model, system = br
    h = 1e-3
    t0 = time.perf_counter()
    ref = reference_solution(system, model.y0, h / 16, 500.0)
    ok = True
    parts = []
    for label, want in TARGET_ACCURACY.items():
        e = score_run(integrate(SchemeSpec.parse(label), system, model.y0, h, 500.0, components=[7]), ref)
        ratio = e / want
        ok &= 1 / 3 <= ratio <= 3
        parts.append(f"{label} {e:.2e} (x{ratio:.2f})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300.0
    assert report(4, ok, "e(1e-3) within x3 of target: " + ", ".join(parts), elapsed)


# 5 -------------------------------------------------------------------------

def test_criterion_05_a0_thresholds():
    t0 = time.perf_counter()
    res = {k: find_theta_thresholds(k, (0.5, 2.5), 1e-3) for k in (2, 3, 4)}
    elapsed = time.perf_counter() - t0
    windows = {2: (0.74, 0.75), 3: (0.87, 0.88), 4: (0.93, 0.94)}
    ok = elapsed < 30.0
    parts = []
    for k, (a, b) in windows.items():
        lo, hi = res[k].lower
        good = a < lo and hi <= b
        ok &= good
        parts.append(f"k={k} lower ({lo:.4f}, {hi:.4f}] {'ok' if good else 'MISS'}")
    for k, target in ((3, 1.9), (4, 1.2)):
        up = res[k].upper
        mid = None if up is None else 0.5 * (up[0] + up[1])
        good = mid is not None and abs(mid - target) <= 0.05
        ok &= good
        parts.append(f"k={k} upper {mid if mid is None else round(mid, 4)} vs {target}+-0.05 "
                     f"{'ok' if good else 'MISS'}")
    assert report(5, ok, "; ".join(parts), elapsed)


# 6 -------------------------------------------------------------------------

def test_criterion_06_closed_form_k2():
    rng = np.random.default_rng(6)
    theta = rng.uniform(0.05, 3.0, 1000)
    z = rng.uniform(-40, 2, 1000) + 1j * rng.uniform(-60, 60, 1000)
    worst = 0.0
    for th, zz in zip(theta, z):
        p = phi_upto(2, complex(th * zz))
        want = np.array([-1 - p[1] * zz - p[2] * (1 - th) * zz, p[2] * (1 - th) * zz])
        got = stability_poly_coeffs(2, th, zz)
        worst = max(worst, np.max(np.abs(got - want) / (1 + np.abs(want))))
    assert report(6, worst <= 1e-13, f"k=2 mechanical vs closed form on 1000 (theta, z): {worst:.1e} (tol 1e-13)")


# 7 -------------------------------------------------------------------------

def test_criterion_07_beta3():
    t0 = time.perf_counter()
    b = compute_beta3(1e-10)
    elapsed = time.perf_counter() - t0
    ok = abs(b - 0.331) <= 0.005 and elapsed < 1.0
    assert report(7, ok, f"beta3 = {b:.6f} (0.331 +- 0.005)", elapsed)


# 8 -------------------------------------------------------------------------

def test_criterion_08_critical_steps(br):
    model, system = br
    t0 = time.perf_counter()

    def dt0(label, lo, scan):
        return critical_time_step(SchemeSpec.parse(label), system, model.y0, 500.0, lo, 2.0, 0.0,
                                  rtol=1e-3, scan_ratio=scan)

    eab2 = dt0("EAB2", 0.002, 1.02)
    ab2 = dt0("AB2", 0.002, 1.02)
    bdf2 = dt0("BDF2", 0.05, None)
    elapsed = time.perf_counter() - t0
    ok = (0.5 <= eab2 / 0.424 <= 2 and 0.5 <= ab2 / 0.0124 <= 2 and eab2 / ab2 >= 10
          and 0.1 <= bdf2 / 0.306 <= 10 and elapsed < 300.0)
    assert report(8, ok, f"dt0 EAB2 {eab2:.4f} (vs 0.424, x{eab2 / 0.424:.2f}), AB2 {ab2:.5f} "
                         f"(vs 0.0124, x{ab2 / 0.0124:.2f}), ratio {eab2 / ab2:.1f} (>=10), "
                         f"BDF2 {bdf2:.3f} (vs 0.306, order of magnitude)", elapsed)


# 9 -------------------------------------------------------------------------

def test_criterion_09_positivity():
    t0 = time.perf_counter()
    taus = gate_time_constants(np.linspace(-90.0, 40.0, 27))
    admitted = positivity_trials(taus, None, n_trials=2000, seed=0)
    beyond = positivity_trials(taus, 1.5, n_trials=2000, seed=1)
    elapsed = time.perf_counter() - t0
    ok = (admitted.admitted > 0 and admitted.admitted_violations == 0 and beyond.violations > 0
          and elapsed < 10.0)
    assert report(9, ok, f"{admitted.admitted} admitted EAB2 gate runs, {admitted.admitted_violations} "
                         f"left [0,1]; at h=1.5/|a| {beyond.violations}/{beyond.trials} violate", elapsed)


# 10 ------------------------------------------------------------------------

def test_criterion_10_stability_grid():
    t0 = time.perf_counter()
    g = GridSpec.default_plane(0.05)
    re, im, R = stability_grid(2, 1.0, g)
    X, _ = np.meshgrid(re, im)
    off = np.abs(X) >= g.dx - 1e-12
    miss = int(np.sum((R < 1)[off] != (X < 0)[off]))
    unstable_074 = not scan_a0(2, 0.74)
    stable_075 = scan_a0(2, 0.75)
    elapsed = time.perf_counter() - t0
    ok = miss == 0 and unstable_074 and stable_075 and elapsed < 60.0
    assert report(10, ok, f"theta=1 grid {R.size} nodes, {miss} misclassified; k=2 scan: theta=0.74 "
                          f"{'unstable' if unstable_074 else 'stable'}, theta=0.75 "
                          f"{'stable' if stable_075 else 'unstable'}", elapsed)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
