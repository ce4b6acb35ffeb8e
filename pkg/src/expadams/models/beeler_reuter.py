"""Beeler-Reuter ventricular action potential model.

Eight state variables ``(m, h, j, d, f, x1, [Ca]_i, v)``; time in ms,
potential in mV, calcium in mol/L.  Constants are read from the packaged
parameter file ``data/beeler_reuter.txt``; the numba kernels read them from a
flat float vector laid out by ``PARAM_ORDER``.
"""

from __future__ import annotations

import math
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np
from numba import njit

from ..core import SplitSystem
from .membrane import MembraneModel, membrane_to_split

GATES = ("m", "h", "j", "d", "f", "x1")
SCALARS = (
    "C_m", "g_Na", "g_NaC", "E_Na", "g_s", "E_s_offset", "E_s_slope",
    "ca_release", "ca_uptake", "ca_rest", "g_K1", "g_x1",
    "stim_amplitude", "stim_start", "stim_duration", "stim_period",
)
RATES = tuple(f"rate_{kind}_{g}" for g in GATES for kind in ("alpha", "beta"))
INITS = tuple(f"init_{g}" for g in GATES) + ("init_ca", "init_v")
STIM_SHAPES = {"rect": 0.0, "smooth": 1.0}
REQUIRED = SCALARS + ("stim_shape",) + RATES + INITS

# Float vector layout for the kernels.
PARAM_ORDER = SCALARS + ("stim_shape",)
_I = {name: i for i, name in enumerate(PARAM_ORDER)}
C_M, G_NA, G_NAC, E_NA, G_S, ES_OFF, ES_SLOPE = range(7)
CA_REL, CA_UP, CA_REST, G_K1, G_X1 = range(7, 12)
ST_AMP, ST_START, ST_DUR, ST_PER, ST_SHAPE = range(12, 17)
RATE0 = len(PARAM_ORDER)
N_PARAMS = RATE0 + 7 * len(RATES)
NG = len(GATES)

DEFAULT_FILE = "beeler_reuter.txt"


def load_parameters(path: str | Path | None = None) -> dict:
    """Parse a ``name = value  # unit`` file and check every key is present."""
    if path is None:
        text = resources.files(__package__).joinpath("data", DEFAULT_FILE).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'name = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        if key == "stim_shape":
            if val not in STIM_SHAPES:
                raise ValueError(f"line {lineno}: stim_shape must be one of {sorted(STIM_SHAPES)}")
            values[key] = val
        elif key.startswith("rate_"):
            row = tuple(float(x) for x in val.split(","))
            if len(row) != 7:
                raise ValueError(f"line {lineno}: rate rows need 7 coefficients")
            values[key] = row
        else:
            values[key] = float(val)
    missing = [k for k in REQUIRED if k not in values]
    unknown = [k for k in values if k not in REQUIRED]
    if missing or unknown:
        raise ValueError(f"parameter file incomplete: missing={missing} unknown={unknown}")
    return values


def pack_parameters(values: dict) -> np.ndarray:
    p = np.empty(N_PARAMS)
    for name in SCALARS:
        p[_I[name]] = values[name]
    p[ST_SHAPE] = STIM_SHAPES[values["stim_shape"]]
    for r, name in enumerate(RATES):
        p[RATE0 + 7 * r:RATE0 + 7 * r + 7] = values[name]
    return p


@njit(cache=True, error_model="numpy")
def _rate(P, row, v):
    o = RATE0 + 7 * row
    x = v + P[o + 2]
    num = P[o] * math.exp(P[o + 1] * x) + P[o + 3] * (v + P[o + 4])
    # expm1 keeps the removable singularity of alpha_m (C7 = -1) accurate.
    den = math.expm1(P[o + 5] * x) + (1.0 + P[o + 6])
    if den == 0.0:
        return P[o + 3] / P[o + 5]
    return num / den


@njit(cache=True, error_model="numpy")
def gate_rates(v, P, alpha, beta):
    for g in range(NG):
        alpha[g] = _rate(P, 2 * g, v)
        beta[g] = _rate(P, 2 * g + 1, v)


@njit(cache=True, error_model="numpy")
def stimulus(t, P):
    per = P[ST_PER]
    s = t - per * math.floor(t / per) if per > 0.0 else t
    if P[ST_SHAPE] == 0.0:
        if P[ST_START] <= s < P[ST_START] + P[ST_DUR]:
            return P[ST_AMP]
        return 0.0
    sigma = P[ST_DUR] / math.sqrt(math.pi)
    z = (s - P[ST_START] - 4.0 * sigma) / sigma
    return P[ST_AMP] * math.exp(-z * z)


@njit(cache=True, error_model="numpy")
def currents(y, P):
    """Return ``(I_ion, I_s)`` at state ``y``."""
    m, h, j, d, f, x1, ca, v = y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7]
    e = v + 23.0
    lin = 25.0 if e == 0.0 else e / (-math.expm1(-0.04 * e))
    i_k1 = P[G_K1] * (
        4.0 * math.expm1(0.04 * (v + 85.0)) / (math.exp(0.08 * (v + 53.0)) + math.exp(0.04 * (v + 53.0)))
        + 0.2 * lin
    )
    i_x1 = x1 * P[G_X1] * math.expm1(0.04 * (v + 77.0)) / math.exp(0.04 * (v + 35.0))
    i_na = (P[G_NA] * m * m * m * h * j + P[G_NAC]) * (v - P[E_NA])
    e_s = P[ES_OFF] - P[ES_SLOPE] * math.log(ca)
    i_s = P[G_S] * d * f * (v - e_s)
    return i_k1 + i_x1 + i_na + i_s, i_s


@njit(cache=True, error_model="numpy")
def split_kernel(t, y, P, a, b):
    alpha = np.empty(NG)
    beta = np.empty(NG)
    gate_rates(y[7], P, alpha, beta)
    for g in range(NG):
        a[g] = -(alpha[g] + beta[g])
        b[g] = alpha[g]
    i_ion, i_s = currents(y, P)
    a[6] = 0.0
    b[6] = -P[CA_REL] * i_s + P[CA_UP] * (P[CA_REST] - y[6])
    a[7] = 0.0
    b[7] = (-i_ion + stimulus(t, P)) / P[C_M]


@njit(cache=True, error_model="numpy")
def rhs_kernel(t, y, P, f):
    """Full right-hand side in the original alpha/beta form, ``alpha (1 - w) - beta w``."""
    alpha = np.empty(NG)
    beta = np.empty(NG)
    gate_rates(y[7], P, alpha, beta)
    for g in range(NG):
        f[g] = alpha[g] * (1.0 - y[g]) - beta[g] * y[g]
    i_ion, i_s = currents(y, P)
    f[6] = -P[CA_REL] * i_s + P[CA_UP] * (P[CA_REST] - y[6])
    f[7] = (-i_ion + stimulus(t, P)) / P[C_M]


def beeler_reuter(path: str | Path | None = None, **overrides) -> MembraneModel:
    """Build the model from a parameter file, optionally overriding entries.

    ``beeler_reuter(stim_shape="smooth", stim_amplitude=0.0)`` etc.
    """
    values = load_parameters(path)
    for key, val in overrides.items():
        if key not in REQUIRED:
            raise KeyError(f"unknown Beeler-Reuter parameter {key!r}")
        values[key] = val
    P = pack_parameters(values)

    def _ab(v):
        alpha, beta = np.empty(NG), np.empty(NG)
        gate_rates(float(v), P, alpha, beta)
        return alpha, beta

    def tau(v):
        alpha, beta = _ab(v)
        return 1.0 / (alpha + beta)

    def w_inf(v):
        alpha, beta = _ab(v)
        return alpha / (alpha + beta)

    def q_fn(w, c, v):
        y = np.concatenate([w, c, [v]])
        i_s = currents(y, P)[1]
        return np.array([-P[CA_REL] * i_s + P[CA_UP] * (P[CA_REST] - c[0])])

    def i_ion(w, c, v):
        return currents(np.concatenate([w, c, [v]]), P)[0] / P[C_M]

    def i_st(t):
        return stimulus(float(t), P) / P[C_M]

    def rhs(t, y):
        f = np.empty(8)
        rhs_kernel(float(t), np.asarray(y, dtype=float), P, f)
        return f

    y0 = np.array([values[k] for k in INITS])
    return MembraneModel("beeler_reuter", GATES, ("ca",), tau, w_inf, q_fn, i_ion, i_st, y0,
                         rhs=rhs, kernel=split_kernel, params=P)


def beeler_reuter_system(model: MembraneModel | None = None, **overrides) -> SplitSystem:
    """The model as a split system with a fast kernel-backed ``eval_ab``."""
    model = model or beeler_reuter(**overrides)
    base = membrane_to_split(model)
    P = model.params

    def eval_ab(t, y):
        a, b = np.empty(8), np.empty(8)
        split_kernel(float(t), np.asarray(y, dtype=float), P, a, b)
        return a, b

    return replace(base, eval_ab=eval_ab)


def gate_time_constants(v_values, model: MembraneModel | None = None) -> np.ndarray:
    """``tau_i(v)`` for every gate and every potential, shape ``(len(v), 6)``."""
    model = model or beeler_reuter()
    return np.array([model.tau(float(v)) for v in np.atleast_1d(v_values)])
