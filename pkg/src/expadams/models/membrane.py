"""Generic membrane equation with gating variables, concentrations and potential.

State layout is ``(w_1..w_p, c_1..c_q, v)``::

    w_i' = (w_inf_i(v) - w_i) / tau_i(v)
    c'   = q(w, c, v)
    v'   = -I_ion(w, c, v) + I_st(t)

Splitting puts ``-1/tau_i(v)`` on the gate rows of the stabilizer and zero
elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..core import SplitSystem


@dataclass(frozen=True)
class MembraneModel:
    name: str
    gates: tuple[str, ...]
    concentrations: tuple[str, ...]
    tau: Callable[[float], np.ndarray]
    w_inf: Callable[[float], np.ndarray]
    q_fn: Callable[[np.ndarray, np.ndarray, float], np.ndarray]
    i_ion: Callable[[np.ndarray, np.ndarray, float], float]
    i_st: Callable[[float], float]
    y0: np.ndarray
    # Optional independent full right-hand side, and numba kernels for the
    # fast loops: split kernel(t, y, params, a_out, b_out).
    rhs: Callable[[float, np.ndarray], np.ndarray] | None = None
    kernel: Any = field(default=None, repr=False)
    params: np.ndarray | None = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return len(self.gates)

    @property
    def q(self) -> int:
        return len(self.concentrations)

    @property
    def dim(self) -> int:
        return self.p + self.q + 1

    @property
    def labels(self) -> tuple[str, ...]:
        return self.gates + self.concentrations + ("v",)

    def unpack(self, y):
        p, q = self.p, self.q
        return y[:p], y[p:p + q], y[p + q]


def membrane_to_split(model: MembraneModel) -> SplitSystem:
    p, q, n = model.p, model.q, model.dim

    def eval_ab(t, y):
        w, c, v = model.unpack(y)
        tau = np.asarray(model.tau(v), dtype=float)
        a = np.zeros(n)
        b = np.empty(n)
        a[:p] = -1.0 / tau
        b[:p] = np.asarray(model.w_inf(v), dtype=float) / tau
        b[p:p + q] = model.q_fn(w, c, v)
        b[-1] = -model.i_ion(w, c, v) + model.i_st(t)
        return a, b

    return SplitSystem(n, eval_ab, model.rhs, name=model.name,
                       kernel=model.kernel, params=model.params)
