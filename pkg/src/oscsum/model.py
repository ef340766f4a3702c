"""Shared types, parameter validation, index scaling and phase handling.

The oscillating sum is

    Z(A, B, N) = sum_n P_N(n) exp(i S_N(n)),
    S_N(n) = A n / sqrt(N) + B n**2 / (2 N**1.5),

with ``P_N`` the Poisson(N) mass.  Writing ``n = N + x sqrt(N)`` splits the
phase into a huge common part ``sqrt(N) (A + B/2)`` and a small local part
``(A + B) x + B x**2 / (2 sqrt(N))``.  Everything downstream relies on that
split, so it lives here.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from . import _twofloat as tf

#: Largest N for which the windowed oracles are allowed.
ORACLE_N_LIMIT = 10**8
#: Largest N for which summation from n = 0 is allowed.
FULL_SUM_LIMIT = 10**6
#: Below this N the asymptotic formulas are not trusted.
ASYMPTOTIC_N_MIN = 10.0


class ParameterError(ValueError):
    """Invalid input parameters."""


class AsymptoticWarning(UserWarning):
    """Parameters lie where the asymptotic expansions are unreliable."""


class Method(str, enum.Enum):
    FULL_SUM = "full-sum"
    WINDOWED_SUM = "windowed-sum"
    CLOSED_FORM = "closed-form"
    STAGE = "stage-k"
    QUADRATURE = "quadrature"


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ParameterError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class SumParams:
    A: float
    B: float
    N: float

    def __post_init__(self) -> None:
        _check_finite(A=self.A, B=self.B, N=self.N)
        if self.N <= 0:
            raise ParameterError(f"N must be positive, got {self.N!r}")

    @property
    def oracle_eligible(self) -> bool:
        return self.N <= ORACLE_N_LIMIT

    @property
    def full_sum_eligible(self) -> bool:
        return self.N <= FULL_SUM_LIMIT

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.N)

    def as_dict(self) -> dict[str, float]:
        return {"A": self.A, "B": self.B, "N": self.N}


@dataclass(frozen=True)
class DoubleSumParams:
    a1: float
    a2: float
    b1: float
    b2: float
    b3: float
    N: float

    def __post_init__(self) -> None:
        _check_finite(a1=self.a1, a2=self.a2, b1=self.b1, b2=self.b2, b3=self.b3, N=self.N)
        if self.N <= 0:
            raise ParameterError(f"N must be positive, got {self.N!r}")

    @property
    def alpha(self) -> float:
        """Linear coefficient of x in the local phase."""
        return self.a1 + self.b1 + self.b3

    @property
    def beta(self) -> float:
        """Linear coefficient of y in the local phase."""
        return self.a2 + self.b2 + self.b3

    def swapped(self) -> "DoubleSumParams":
        return DoubleSumParams(self.a2, self.a1, self.b2, self.b1, self.b3, self.N)

    def as_dict(self) -> dict[str, float]:
        return {
            "a1": self.a1, "a2": self.a2, "b1": self.b1,
            "b2": self.b2, "b3": self.b3, "N": self.N,
        }


@dataclass(frozen=True)
class Evaluation:
    """Output of every evaluator.

    ``error_bound`` is a heuristic magnitude, not a certificate; ``None`` when
    no bound is available (e.g. closed forms beyond the oracle range).
    """

    value: complex
    method: Method
    params: Mapping[str, Any] = field(default_factory=dict)
    error_bound: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value.real) and math.isfinite(self.value.imag)):
            raise FloatingPointError(f"non-finite result {self.value!r} ({self.method.value})")
        if self.error_bound is not None and not self.error_bound >= 0:
            raise ValueError(f"error_bound must be >= 0, got {self.error_bound!r}")

    def to_dict(self) -> dict[str, Any]:
        z = self.value
        out: dict[str, Any] = {
            "method": self.method.value,
            "params": dict(self.params),
            "value": {"re": z.real, "im": z.imag, "abs": abs(z), "arg": math.atan2(z.imag, z.real)},
        }
        if self.error_bound is not None:
            out["error_bound"] = self.error_bound
        return out


@dataclass(frozen=True)
class Window:
    """Integer window ``[n_lo, n_hi]`` (inclusive)."""

    n_lo: int
    n_hi: int

    def __len__(self) -> int:
        return self.n_hi - self.n_lo + 1

    def __contains__(self, n: object) -> bool:
        return isinstance(n, (int, np.integer)) and self.n_lo <= n <= self.n_hi

    def indices(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1, dtype=np.int64)


@dataclass(frozen=True)
class ScaledDomain:
    x_lo: float
    x_hi: float


def validate(A: float, B: float, N: float) -> SumParams:
    """Check (A, B, N) and return a :class:`SumParams`.

    Emits :class:`AsymptoticWarning` for N < 10 instead of failing.
    """
    p = SumParams(float(A), float(B), float(N))
    if p.N < ASYMPTOTIC_N_MIN:
        warnings.warn(f"N={p.N!r} < {ASYMPTOTIC_N_MIN}: asymptotic formulas unreliable",
                      AsymptoticWarning, stacklevel=2)
    return p


def scale_index(n, N: float):
    """Map an index n to the scaled variable x = (n - N) / sqrt(N)."""
    return (n - N) / math.sqrt(N)


def phase(n, p: SumParams):
    """The raw phase S_N(n). Only numerically safe for moderate n and N."""
    return p.A * n / math.sqrt(p.N) + p.B * n * n / (2.0 * p.N**1.5)


def global_phase(coef, N: float, coef_lo=0.0):
    """``sqrt(N) * (coef + coef_lo)`` reduced modulo 2*pi into [-pi, pi].

    Both ``sqrt(N)`` and the coefficient are carried as two-floats, so the
    result keeps full binary64 accuracy even when the unreduced phase is
    ~1e12.  ``coef`` may be an array.
    """
    return tf.reduce_two_pi(tf.mul(tf.sqrt(float(N)), (coef, coef_lo)))


def common_phase(p: SumParams) -> float:
    """sqrt(N) (A + B/2) mod 2*pi, from an exact two-float A + B/2."""
    hi, lo = tf.two_sum(p.A, 0.5 * p.B)  # exact: B/2 is exact
    return global_phase(hi, p.N, lo)


def local_phase(x, p: SumParams):
    """(A + B) x + B x**2 / (2 sqrt(N))."""
    return (p.A + p.B) * x + p.B * x * x / (2.0 * math.sqrt(p.N))


def phase_decomposed(x, p: SumParams) -> tuple[float, Any]:
    """Split S_N(N + x sqrt(N)) into (common phase mod 2*pi, local phase)."""
    return common_phase(p), local_phase(x, p)


def window(N: float, widen: float = 1.0) -> tuple[Window, ScaledDomain]:
    """The window N +- widen*sqrt(2 N ln N), clamped at 0, and its scaled image."""
    if not N > 1.0:
        raise ParameterError(f"window needs N > 1, got {N!r}")
    if not widen >= 1.0:
        raise ParameterError(f"widen must be >= 1, got {widen!r}")
    half = widen * math.sqrt(2.0 * N * math.log(N))
    n_lo = max(0, math.ceil(N - half))
    n_hi = math.floor(N + half)
    x_half = widen * math.sqrt(2.0 * math.log(N))
    x_lo = max(-x_half, -math.sqrt(N))
    return Window(n_lo, n_hi), ScaledDomain(x_lo, x_half)
