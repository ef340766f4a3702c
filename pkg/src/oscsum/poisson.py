"""Poisson mass, its continuous interpolation, Stirling pieces and derivatives.

``log_poisson`` is the workhorse: it evaluates ln(e^-N N^y / Gamma(y+1)) in the
saddle-point form

    -bd0(y, N) - ln(2 pi y)/2 - stirlerr(y)

which keeps full relative accuracy near the mode even for N ~ 1e8, where the
naive ``-N + y ln N - lgamma(y+1)`` loses ~8 digits to cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .model import window

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_TINY = math.log(np.finfo(float).tiny)

# Stirling series coefficients of lgamma(y+1) - [(y+1/2) ln y - y + ln sqrt(2 pi)]
_S0 = 1.0 / 12
_S1 = 1.0 / 360
_S2 = 1.0 / 1260
_S3 = 1.0 / 1680
_S4 = 1.0 / 1188


@dataclass(frozen=True)
class PmfValue:
    log_p: float
    p: float


def _as_pmf_value(log_p: float) -> PmfValue:
    return PmfValue(log_p, math.exp(log_p) if log_p >= _LOG_TINY else 0.0)


def stirlerr(y):
    """lgamma(y+1) - (y + 1/2) ln y + y - ln sqrt(2 pi), for y > 0."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    big = y > 15.0
    yb = y[big]
    y2 = 1.0 / (yb * yb)
    out[big] = (_S0 - (_S1 - (_S2 - (_S3 - _S4 * y2) * y2) * y2) * y2) / yb
    ys = y[~big]
    out[~big] = special.gammaln(ys + 1.0) - (ys + 0.5) * np.log(ys) + ys - _LN_SQRT_2PI
    return out


def bd0(y, N: float):
    """y ln(y/N) + N - y without cancellation (Loader's deviance term)."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    d = y - N
    close = np.abs(d) < 0.1 * (y + N)
    if np.any(close):
        yc = y[close]
        dc = d[close]
        v = dc / (yc + N)
        s = dc * v
        ej = 2.0 * yc * v
        v2 = v * v
        for j in range(1, 60):
            ej = ej * v2
            s_new = s + ej / (2 * j + 1)
            if np.array_equal(s_new, s):
                break
            s = s_new
        out[close] = s
    far = ~close
    yf = y[far]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[far] = np.where(yf > 0, yf * np.log(yf / N), 0.0) + N - yf
    return out


def log_poisson(y, N: float):
    """Vectorized ln P_N(y) for real y >= 0 (continuous in y)."""
    y = np.asarray(y, dtype=float)
    out = np.full(y.shape, -np.inf)
    pos = y > 0
    yp = y[pos]
    out[pos] = -bd0(yp, N) - 0.5 * np.log(yp) - _LN_SQRT_2PI - stirlerr(yp)
    out[y == 0] = -N
    return out


def log_pmf(n: int, N: float) -> PmfValue:
    """ln of e^-N N^n / n! for a nonnegative integer n."""
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    if not N > 0:
        raise ValueError(f"N must be positive, got {N!r}")
    return _as_pmf_value(float(log_poisson(float(n), N)))


def pmf_continuous(y: float, N: float) -> PmfValue:
    """e^-N N^y / Gamma(y+1) for real y > 0."""
    if not y > 0:
        raise ValueError(f"y must be positive, got {y!r}")
    if not N > 0:
        raise ValueError(f"N must be positive, got {N!r}")
    return _as_pmf_value(float(log_poisson(y, N)))


def stirling_gamma_log(x: float) -> float:
    """ln of (x/e)^x sqrt(2 pi x) (1 + 1/(12x) + 1/(288x^2)), a three-term Gamma(x+1)."""
    if not x > 0:
        raise ValueError(f"x must be positive, got {x!r}")
    return (x * math.log(x) - x + 0.5 * math.log(2.0 * math.pi * x)
            + math.log1p(1.0 / (12.0 * x) + 1.0 / (288.0 * x * x)))


def corrected_gaussian_density(x, N: float):
    """Gaussian approximation of the Poisson mass with Stirling corrections.

    Evaluated at the scaled point ``x = (n - N)/sqrt(N)``; approximates
    ``P_N(n)`` (not the density of x).  Refuses ``|x| > sqrt(N)/2``, where the
    expansion has no meaning.
    """
    x_arr = np.asarray(x, dtype=float)
    rn = math.sqrt(N)
    if np.any(np.abs(x_arr) > 0.5 * rn):
        raise ValueError(f"|x| must not exceed sqrt(N)/2 = {0.5 * rn!r}")
    expo = -0.5 * x_arr**2 + x_arr**3 / (6.0 * rn) - x_arr**4 / (12.0 * N)
    denom = 1.0 + x_arr / (2.0 * rn) + 1.0 / (12.0 * N)
    val = np.exp(expo) / (math.sqrt(2.0 * math.pi * N) * denom)
    return float(val) if val.ndim == 0 else val


def pmf_d1_ratio(y, N: float):
    """Leading terms of P'(y)/P(y): ln(N/y) - 1/(2y)."""
    y = np.asarray(y, dtype=float)
    r = np.log(N / y) - 0.5 / y
    return float(r) if r.ndim == 0 else r


def pmf_d2_ratio(y, N: float):
    """Leading-order magnitude of P''(y)/P(y): (ln(N/y) - 1/(2y))^2 + 1/y.

    The exact ratio is ``d1**2 - trigamma(y+1)``; adding the curvature term
    instead of subtracting it makes this an upper estimate of ``|P''/P|``.
    """
    d1 = pmf_d1_ratio(y, N)
    r = np.asarray(d1) ** 2 + 1.0 / np.asarray(y, dtype=float)
    return float(r) if r.ndim == 0 else r


def pmf_derivatives(y, N: float):
    """(P, P', P'') of the continuous Poisson interpolation, via digamma/trigamma."""
    y = np.asarray(y, dtype=float)
    p = np.exp(log_poisson(y, N))
    g1 = math.log(N) - special.digamma(y + 1.0)
    g2 = g1 * g1 - special.polygamma(1, y + 1.0)
    return p, p * g1, p * g2


def second_derivative_sum_bound(N: float) -> float:
    """Sum over the window of P(n) |P''/P|(n), a computable stand-in for sum |P''(n)|."""
    if N < 10:
        raise ValueError(f"N must be >= 10, got {N!r}")
    w, _ = window(N)
    n = w.indices().astype(float)
    n = n[n > 0]
    return math.fsum(np.exp(log_poisson(n, N)) * np.abs(pmf_d2_ratio(n, N)))
