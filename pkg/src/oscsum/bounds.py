"""Gaussian tail brackets, trapezoid error certificates and the error budget.

All tails here are two-sided and unnormalized: ``int_{|x| >= a} ... dx``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SumParams, ParameterError, window
from .poisson import log_poisson, pmf_d1_ratio, pmf_d2_ratio, second_derivative_sum_bound

SQRT_2PI = math.sqrt(2.0 * math.pi)

# max over [n, n+1] estimated from these offsets, times the safety factor
_SAMPLE_OFFSETS = (0.0, 0.5, 1.0)
_MAX_SAFETY = 1.5


@dataclass(frozen=True)
class TailBracket:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper:
            raise ValueError(f"bad bracket [{self.lower!r}, {self.upper!r}]")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def gaussian_tail(a: float) -> float:
    """Exact int_{|x|>=a} exp(-x^2/2) dx = sqrt(2 pi) erfc(a/sqrt 2)."""
    return SQRT_2PI * math.erfc(a / math.sqrt(2.0))


def komatsu_tail(a: float) -> TailBracket:
    """Komatsu's two-sided bracket of int_{|x|>=a} exp(-x^2/2) dx."""
    if not a >= 0:
        raise ValueError(f"a must be >= 0, got {a!r}")
    g = 4.0 * math.exp(-0.5 * a * a)
    return TailBracket(g / (math.sqrt(a * a + 4.0) + a), g / (math.sqrt(a * a + 2.0) + a))


def komatsu_moment_upper(a: float, k: int) -> float:
    """Upper bound on int_{|x|>=a} |x|^k exp(-x^2/2) dx for k in {1, 2}.

    Bound: 4 (a+1)^k exp(-a^2/2) / (sqrt(a^2+2) + a).  With the exponent
    ``k - 1`` the inequality fails for k = 1 once a > 1/2 (true tail is
    2 exp(-a^2/2)), so the prefactor carries the full power k.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k!r}")
    if not a >= 0:
        raise ValueError(f"a must be >= 0, got {a!r}")
    return 4.0 * (a + 1.0) ** k * math.exp(-0.5 * a * a) / (math.sqrt(a * a + 2.0) + a)


def tail_weight_bound(N: float) -> float:
    """Heuristic bound on the Poisson mass outside the window.

    Gaussian tail at a = sqrt(2 ln N) plus three times the summed |P''|
    (the sum-to-integral correction).
    """
    if N < 10:
        raise ParameterError(f"N must be >= 10, got {N!r}")
    a = math.sqrt(2.0 * math.log(N))
    return komatsu_tail(a).upper / SQRT_2PI + 3.0 * second_derivative_sum_bound(N)


def trapezoid_error_bound(h: float, max_abs_f2: float, panels: int) -> float:
    """panels * h^3 / 6 * max|f''|."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h!r}")
    if not max_abs_f2 >= 0:
        raise ValueError(f"max_abs_f2 must be >= 0, got {max_abs_f2!r}")
    if panels < 1:
        raise ValueError(f"panels must be >= 1, got {panels!r}")
    return panels * h**3 * max_abs_f2 / 6.0


def error_budget(p: SumParams) -> float:
    """Heuristic size of |Z - integral over the scaled domain|.

    Tail mass plus (1/6) sum over the window of
    3|P''(n)| + 2 max|P' S'| + max|P S''|, the maxima over [n, n+1] taken from
    three samples and inflated by 1.5.
    """
    if not p.oracle_eligible:
        raise ParameterError(f"N={p.N!r} above the oracle limit")
    N = p.N
    rn = math.sqrt(N)
    w, _ = window(N)
    n = w.indices().astype(float)
    n = n[n > 0]

    p_n = np.exp(log_poisson(n, N))
    d2_term = 3.0 * p_n * np.abs(pmf_d2_ratio(n, N))

    d1_max = np.zeros_like(n)
    s2_max = np.zeros_like(n)
    s2 = abs(p.B) / N**1.5
    for off in _SAMPLE_OFFSETS:
        y = n + off
        py = np.exp(log_poisson(y, N))
        s1 = np.abs(p.A / rn + p.B * y / N**1.5)
        d1_max = np.maximum(d1_max, py * np.abs(pmf_d1_ratio(y, N)) * s1)
        s2_max = np.maximum(s2_max, py * s2)
    inner = d2_term + _MAX_SAFETY * (2.0 * d1_max + s2_max)
    return tail_weight_bound(N) + math.fsum(inner) / 6.0
