import cmath
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from expadams.core import BracketError
from expadams.phi import phi_upto
from expadams.stability import (GridSpec, StabilityQuery, compute_beta3, estimate_alpha,
                                find_theta_thresholds, positivity_check_eab2, positivity_check_eab3,
                                positivity_constant_eab2, positivity_trials, psi, rho, scan_a0,
                                stability_grid, stability_poly_coeffs, write_grid_csv)


def closed_form_k2(theta, z):
    p = phi_upto(2, complex(theta * z))
    c1 = -1 - p[1] * z - p[2] * (1 - theta) * z
    c2 = p[2] * (1 - theta) * z
    return np.array([c1, c2])


def symbolic_coeffs(k, theta, z):
    """Apply the scheme to y' = lam y (h = 1) from scratch: extrapolate g over
    t = 0, -1, ..., integrate the variation-of-constants formula exactly."""
    s = sp.Symbol("s")
    th, lam = sp.nsimplify(theta), sp.nsimplify(z)
    ys = sp.symbols(f"y0:{k}")
    p = sp.interpolate([(-i, (1 - th) * lam * ys[i]) for i in range(k)], s)
    y_new = sp.expand(sp.exp(th * lam) * ys[0] + sp.integrate(sp.exp(th * lam * (1 - s)) * p, (s, 0, 1)))
    return np.array([complex(-sp.N(y_new.coeff(ys[i]), 30)) for i in range(k)])


@given(st.floats(0.05, 3.0), st.complex_numbers(max_magnitude=40, allow_nan=False))
def test_k2_matches_closed_form(theta, z):
    got = stability_poly_coeffs(2, theta, z)
    want = closed_form_k2(theta, z)
    assert np.all(np.abs(got - want) <= 1e-13 * (1 + np.abs(want)))


@pytest.mark.parametrize("k,theta,z", [(3, 0.9, -1.0), (3, 1.7, -12.5), (4, 0.95, -3.0), (4, 1.2, -25.0),
                                       (2, 0.6, -0.5)])
def test_matches_symbolic_expansion(k, theta, z):
    assert np.allclose(stability_poly_coeffs(k, theta, z), symbolic_coeffs(k, theta, z), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_exact_split_coefficients(k):
    z = -1.3 + 0.4j
    c = stability_poly_coeffs(k, 1.0, z)
    assert c[0] == pytest.approx(-cmath.exp(z), abs=1e-15)
    assert np.all(c[1:] == 0)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_origin(k):
    c = stability_poly_coeffs(k, 0.7, 0.0)
    assert c[0] == -1 and np.all(c[1:] == 0)
    assert rho(k, 0.7, 0.0) == pytest.approx(1.0, abs=1e-12)


def test_rho_exact_split_values(rng):
    assert rho(2, 1.0, -1.0) == pytest.approx(math.exp(-1))
    z = rng.uniform(-20, 20, 1000) + 1j * rng.uniform(-20, 20, 1000)
    z = z[np.abs(z) <= 20]
    for k in (2, 3, 4):
        assert np.allclose(rho(k, 1.0, z), np.abs(np.exp(z)), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("k", [3, 4])
@given(st.floats(0.3, 2.5), st.floats(-30, 2), st.floats(0, 30))
def test_root_modulus_matches_polynomial_roots(k, theta, x, y):
    z = complex(x, y)
    c = stability_poly_coeffs(k, theta, z)
    roots = np.roots(np.concatenate([[1.0], c]))
    assert rho(k, theta, z) == pytest.approx(np.abs(roots).max(), rel=1e-9, abs=1e-12)
    # Vieta: sum of roots = -c_1, product = (-1)^k c_k
    assert abs(roots.sum() + c[0]) <= 1e-9 * (1 + abs(c[0]))
    assert abs(np.prod(roots) - (-1) ** k * c[-1]) <= 1e-9 * (1 + abs(c[-1]))


@given(st.integers(2, 4), st.floats(0.3, 2.5), st.complex_numbers(max_magnitude=40, allow_nan=False))
def test_conjugate_symmetry(k, theta, z):
    assert rho(k, theta, z) == pytest.approx(rho(k, theta, z.conjugate()), rel=1e-10, abs=1e-14)


def test_vectorised_rho_matches_scalar():
    z = np.array([-1.0, -5 + 2j, 0.5j])
    vec = rho(3, 0.9, z)
    assert np.allclose(vec, [rho(3, 0.9, complex(x)) for x in z], rtol=1e-14)


def test_query_validation():
    with pytest.raises(ValueError):
        StabilityQuery(5, 1.0, -1)
    with pytest.raises(ValueError):
        StabilityQuery(2, 0.0, -1)
    assert StabilityQuery(2, 1.0, -1.0).rho() == pytest.approx(math.exp(-1))


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(-1.0, 0.0, 0.0)
    g = GridSpec.real_axis()
    assert g.re.size == 3001 and g.re[0] == -30.0 and g.re[-1] == 0.0


@pytest.mark.parametrize("k,theta,stable", [(2, 0.9, True), (2, 0.74, False), (2, 0.75, True),
                                            (3, 1.0, True), (4, 1.0, True), (3, 2.0, True), (3, 2.1, False),
                                            (3, 0.86, False), (4, 1.3, False)])
def test_scan_a0(k, theta, stable):
    assert scan_a0(k, theta) is stable


def test_k2_lower_threshold():
    res = find_theta_thresholds(2, tol=1e-3)
    lo, hi = res.lower
    assert 0.74 < lo < hi <= 0.75 and hi - lo <= 1e-3
    assert res.upper is None


def test_threshold_bracket_errors():
    with pytest.raises(BracketError):
        find_theta_thresholds(2, (0.8, 2.5))
    with pytest.raises(ValueError):
        find_theta_thresholds(2, (0.5, 0.9))


def test_grid_exact_split_matches_half_plane():
    g = GridSpec(-4.0, 2.0, 0.05, 0.0, 6.0)
    re, im, R = stability_grid(3, 1.0, g)
    X, _ = np.meshgrid(re, im)
    off = np.abs(X) >= 0.05
    assert np.array_equal((R < 1)[off], (X < 0)[off])


def test_grid_parallel_is_deterministic():
    g = GridSpec(-10.0, 2.0, 0.25, 0.0, 8.0)
    _, _, R1 = stability_grid(4, 0.95, g)
    _, _, R4 = stability_grid(4, 0.95, g, workers=4)
    assert np.array_equal(R1, R4)


def test_grid_csv_format(tmp_path):
    g = GridSpec(-1.0, 0.0, 0.5, 0.0, 0.5)
    re, im, R = stability_grid(2, 0.9, g)
    p = write_grid_csv(tmp_path / "g.csv", re, im, R)
    raw = p.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "re_z,im_z,rho" and len(lines) == 1 + R.size
    x, y, r = lines[2].split(",")
    assert (float(x), float(y)) == (-0.5, 0.0)
    assert float(r) == float(f"{R[0, 1]:.15g}")


def test_wedge_angle_descriptive():
    re, im, R = stability_grid(2, 0.9, GridSpec.default_plane(0.1))
    assert 70.0 < estimate_alpha(re, im, R) < 90.0


def test_eab2_positivity_constant():
    assert positivity_constant_eab2(-1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    # e^x + x phi_2(x) = 1 - e^(-1/2) at x = -1/2
    assert positivity_constant_eab2(-1.0, 0.5) == pytest.approx(1 - math.exp(-0.5), rel=1e-14)
    assert positivity_constant_eab2(-1.0, 0.5) == pytest.approx(0.39347, abs=1e-6)


def test_eab2_positivity_check():
    assert positivity_check_eab2(0.5, -1.0, 0.5, 0.2, 0.0, 1.0)
    assert not positivity_check_eab2(1.01, -1.0, 0.5, 0.2, 0.0, 1.0)
    assert not positivity_check_eab2(0.5, -1.0, 1.0, 0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        positivity_check_eab2(0.5, 1.0, 0.5, 0.0, 0.0, 1.0)


def test_psi_at_origin():
    assert psi(0.0) == pytest.approx(1 + (1.5 - 2) / 2 + (1 - 2) / 6)


def test_beta3():
    b = compute_beta3(1e-12)
    assert 0.3 < b < 0.4
    assert psi(-b + 1e-9) >= 0 > psi(-b - 1e-6)
    assert np.all([psi(-s) >= 0 for s in np.linspace(0, b, 200)])


def test_eab3_positivity_check():
    a = -2.0
    assert positivity_check_eab3(0.33 / abs(a), a, 0.0, 0.0, 0.0, 1.0)
    assert not positivity_check_eab3(0.34 / abs(a), a, 0.0, 0.0, 0.0, 1.0)


def test_positivity_trials_small():
    taus = [0.5, 3.0, 40.0]
    ok = positivity_trials(taus, None, n_trials=300, n_steps=80, seed=3)
    assert ok.admitted > 100 and ok.admitted_violations == 0
    bad = positivity_trials(taus, 1.5, n_trials=300, n_steps=80, seed=3)
    assert bad.admitted == 0 and bad.violations > 0
