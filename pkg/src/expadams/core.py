"""Shared data model: split systems, multistep history and scheme ids."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

# A trajectory is flagged as blown up beyond this max-norm.
OVERFLOW_CAP = 1e10

SPACING_RTOL = 1e-12


class StepOverflow(ArithmeticError):
    """A step produced a non-finite value or exceeded ``OVERFLOW_CAP``."""


class SolverFailure(RuntimeError):
    """The nonlinear solver of an implicit step did not converge."""


class BracketError(ValueError):
    """A bisection was started on an interval that does not bracket a change."""


def overflowed(y: np.ndarray) -> bool:
    return not np.all(np.isfinite(y)) or np.max(np.abs(y)) > OVERFLOW_CAP


def check_finite(y: np.ndarray) -> np.ndarray:
    if overflowed(y):
        raise StepOverflow(f"non-finite or overflowing state (max |y| = {np.max(np.abs(y)):.3g})")
    return y


@dataclass(frozen=True)
class SplitSystem:
    """ODE ``y' = f(t, y)`` written as ``f = a(t, y) * y + b(t, y)``.

    ``eval_ab`` returns the diagonal stabilizer ``a`` and the remainder ``b``
    together (models usually share work between them).  ``eval_f`` is an
    independent evaluation of the full right-hand side; when omitted it is
    assembled from the split.

    ``kernel``/``params`` optionally carry a numba-compiled version of the
    split, ``kernel(t, y, params, a_out, b_out)``, used by the fast
    trajectory loops.
    """

    dim: int
    eval_ab: Callable[[float, np.ndarray], tuple[np.ndarray, np.ndarray]]
    eval_f: Callable[[float, np.ndarray], np.ndarray] | None = None
    name: str = ""
    kernel: Any = field(default=None, compare=False, repr=False)
    params: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.eval_f is None:
            object.__setattr__(self, "eval_f", self._assembled_f)

    def _assembled_f(self, t, y):
        a, b = self.eval_ab(t, y)
        return a * y + b

    def eval_a(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.eval_ab(t, y)[0]

    def eval_b(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.eval_ab(t, y)[1]


def consistency_check(system: SplitSystem, t: float, y, tol: float) -> bool:
    """True iff ``eval_f`` agrees with ``a*y + b`` to ``tol`` (relative to 1 + |f|)."""
    y = np.asarray(y, dtype=float)
    f = np.asarray(system.eval_f(t, y), dtype=float)
    a, b = system.eval_ab(t, y)
    gap = np.max(np.abs(f - (a * y + b)))
    return bool(gap <= tol * (1.0 + np.max(np.abs(f))))


@dataclass(frozen=True)
class Sample:
    t: float
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class HistoryWindow:
    """The last ``capacity`` samples of a uniform-step trajectory, newest last."""

    capacity: int
    samples: tuple[Sample, ...] = ()

    def __post_init__(self):
        if not 1 <= self.capacity <= 4:
            raise ValueError("history capacity must be in 1..4")
        if len(self.samples) > self.capacity:
            raise ValueError("more samples than capacity")
        ts = [s.t for s in self.samples]
        if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
            raise ValueError("sample times must be strictly increasing")
        if len(ts) > 2:
            d = np.diff(ts)
            if np.max(np.abs(d - d[0])) > SPACING_RTOL * max(abs(d[0]), np.max(np.abs(ts))):
                raise ValueError("sample times are not uniformly spaced")

    def push(self, sample: Sample) -> HistoryWindow:
        kept = self.samples[1:] if len(self.samples) == self.capacity else self.samples
        return HistoryWindow(self.capacity, kept + (sample,))

    @property
    def full(self) -> bool:
        return len(self.samples) == self.capacity

    @property
    def newest(self) -> Sample:
        return self.samples[-1]

    def spacing(self) -> float | None:
        if len(self.samples) < 2:
            return None
        return self.samples[-1].t - self.samples[-2].t

    def arrays(self):
        """Stacked ``(Y, A, B)`` arrays of shape ``(len, N)``, oldest row first."""
        Y = np.array([s.y for s in self.samples], dtype=float)
        A = np.array([s.a for s in self.samples], dtype=float)
        B = np.array([s.b for s in self.samples], dtype=float)
        return Y, A, B

    def require(self, k: int, h: float | None = None):
        if len(self.samples) != k:
            raise ValueError(f"history holds {len(self.samples)} samples, step needs {k}")
        if h is not None and k > 1:
            dh = self.spacing()
            if abs(dh - h) > 1e-9 * h:
                raise ValueError(f"history spacing {dh} does not match h={h}")


def make_sample(system: SplitSystem, t: float, y) -> Sample:
    y = np.asarray(y, dtype=float)
    a, b = system.eval_ab(t, y)
    return Sample(t, y, np.asarray(a, dtype=float), np.asarray(b, dtype=float))


class Family(str, enum.Enum):
    EAB = "EAB"
    IEAB = "IEAB"
    AB = "AB"
    BDF = "BDF"
    RK4 = "RK4"


_ORDERS = {
    Family.EAB: range(1, 5),
    Family.IEAB: range(2, 5),
    Family.AB: range(1, 5),
    Family.BDF: range(2, 5),
    Family.RK4: range(4, 5),
}


@dataclass(frozen=True)
class SchemeSpec:
    family: Family
    order: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.order not in _ORDERS[self.family]:
            raise ValueError(f"order {self.order} invalid for {self.family.value}")

    @property
    def steps(self) -> int:
        """Number of past values the scheme consumes (1 for one-step schemes)."""
        return 1 if self.family is Family.RK4 else self.order

    @property
    def label(self) -> str:
        if self.family is Family.RK4:
            return "RK4"
        name = "I-EAB" if self.family is Family.IEAB else self.family.value
        return f"{name}{self.order}"

    @classmethod
    def parse(cls, text: str) -> SchemeSpec:
        """Parse labels such as ``EAB2``, ``I-EAB3``, ``ieab_4``, ``RK4``."""
        key = text.strip().upper().replace("-", "").replace("_", "")
        if key == "RK4":
            return cls(Family.RK4, 4)
        m = re.fullmatch(r"(IEAB|EAB|AB|BDF)([1-9])", key)
        if not m:
            raise ValueError(f"unrecognised scheme {text!r}")
        return cls(Family(m.group(1)), int(m.group(2)))

    def __str__(self):
        return self.label
