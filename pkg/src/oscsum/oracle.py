"""Ground truth by direct summation.

Every sum is evaluated as ``exp(i * common) * sum_n w_n exp(i * local_n)``:
the large common phase is reduced once in two-float arithmetic and the
per-term phases stay small.  Real and imaginary parts are accumulated with
``math.fsum`` (exactly rounded, so the result does not depend on the order of
terms).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _twofloat as tf
from .bounds import tail_weight_bound
from .model import (
    FULL_SUM_LIMIT,
    ORACLE_N_LIMIT,
    DoubleSumParams,
    Evaluation,
    Method,
    ParameterError,
    SumParams,
    common_phase,
    global_phase,
    local_phase,
    window,
)
from .poisson import log_poisson

DOUBLE_SUM_LIMIT = 10**6


class OracleLimitError(ParameterError):
    """N is too large for brute-force summation."""


@dataclass(frozen=True)
class OracleConfig:
    """How far the oracles sum.

    ``n_max`` set: full sums stop there.  Otherwise they stop at N + k sqrt(N)
    with k the smallest value whose Chernoff tail bound is below ``tail_eps``.
    """

    tail_eps: float = 1e-16
    n_max: int | None = None
    widen: float = 1.0
    oracle_n_limit: int = ORACLE_N_LIMIT

    def __post_init__(self) -> None:
        if not 0.0 < self.tail_eps <= 1e-6:
            raise ValueError(f"tail_eps must be in (0, 1e-6], got {self.tail_eps!r}")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max!r}")
        if not self.widen >= 1.0:
            raise ValueError(f"widen must be >= 1, got {self.widen!r}")


DEFAULT_CONFIG = OracleConfig()


def chernoff_upper_tail(N: float, k: float) -> float:
    """Bound on P(X >= N + k sqrt(N)) for X ~ Poisson(N)."""
    if k <= 0:
        return 1.0
    # exp(-delta^2 N / 3) for delta = k/sqrt(N) <= 1, exp(-delta N / 3) above
    return math.exp(-min(k * k, k * math.sqrt(N)) / 3.0)


def _full_range(N: float, cfg: OracleConfig, shift: int = 0) -> tuple[int, float]:
    """Upper summation index and the tail bound beyond it."""
    rn = math.sqrt(N)
    if cfg.n_max is not None:
        n_max = cfg.n_max
    else:
        k = 1.0
        while chernoff_upper_tail(N, k) >= cfg.tail_eps:
            k += 0.25
        n_max = math.ceil(N + k * rn) + shift
    return n_max, chernoff_upper_tail(N, (n_max - shift - N) / rn)


def _accumulate(log_w, local) -> complex:
    w = np.exp(log_w)
    re = math.fsum(w * np.cos(local))
    im = math.fsum(w * np.sin(local))
    if not (math.isfinite(re) and math.isfinite(im)):
        raise FloatingPointError("non-finite accumulation")
    return complex(re, im)


def _rotate(common: float, s: complex) -> complex:
    c, sn = math.cos(common), math.sin(common)
    return complex(c * s.real - sn * s.imag, sn * s.real + c * s.imag)


def _check_limit(N: float, limit: float, what: str) -> None:
    if N > limit:
        raise OracleLimitError(f"N={N!r} exceeds the {what} limit {limit:g}")


def _window_indices(N: float, cfg: OracleConfig) -> np.ndarray:
    w, _ = window(N, cfg.widen)
    return w.indices().astype(float)


def sum_z_full(p: SumParams, cfg: OracleConfig = DEFAULT_CONFIG) -> Evaluation:
    """Z(A, B, N) summed from n = 0 up to the configured cap."""
    _check_limit(p.N, FULL_SUM_LIMIT, "full-sum")
    n_max, tail = _full_range(p.N, cfg)
    n = np.arange(0, n_max + 1, dtype=float)
    x = (n - p.N) / math.sqrt(p.N)
    s = _accumulate(log_poisson(n, p.N), local_phase(x, p))
    return Evaluation(_rotate(common_phase(p), s), Method.FULL_SUM, p.as_dict(), tail)


def sum_z_windowed(p: SumParams, cfg: OracleConfig = DEFAULT_CONFIG) -> Evaluation:
    """Z restricted to the window N +- sqrt(2 N ln N) (times cfg.widen)."""
    _check_limit(p.N, cfg.oracle_n_limit, "oracle")
    n = _window_indices(p.N, cfg)
    x = (n - p.N) / math.sqrt(p.N)
    s = _accumulate(log_poisson(n, p.N), local_phase(x, p))
    return Evaluation(_rotate(common_phase(p), s), Method.WINDOWED_SUM, p.as_dict(),
                      tail_weight_bound(p.N))


def sum_zs(p: SumParams, s: int, cfg: OracleConfig = DEFAULT_CONFIG, full: bool = False) -> Evaluation:
    """sum_n n^s P_N(n) exp(i S_N(n)) for s in {1, 2}.

    Windowed by default; ``full=True`` sums from n = 1 to the tail cap, which
    is what exact reindexing identities need.
    """
    if s not in (1, 2):
        raise ValueError(f"s must be 1 or 2, got {s!r}")
    if full:
        _check_limit(p.N, FULL_SUM_LIMIT, "full-sum")
        n_max, tail = _full_range(p.N, cfg, shift=s)
        n = np.arange(1, n_max + 1, dtype=float)
        bound = (p.N + s) ** s * tail
        method = Method.FULL_SUM
    else:
        _check_limit(p.N, cfg.oracle_n_limit, "oracle")
        n = _window_indices(p.N, cfg)
        n = n[n > 0]
        bound = (p.N + 2.0) ** s * tail_weight_bound(p.N)
        method = Method.WINDOWED_SUM
    x = (n - p.N) / math.sqrt(p.N)
    acc = _accumulate(log_poisson(n, p.N) + s * np.log(n), local_phase(x, p))
    params = {**p.as_dict(), "s": s}
    return Evaluation(_rotate(common_phase(p), acc), method, params, bound)


def _ztilde_local(x, p: SumParams):
    # A sqrt(n) + B n/(2 sqrt N) - sqrt(N)(A + B/2), exactly:
    # sqrt(n) - sqrt(N) = x / (1 + sqrt(1 + x/sqrt(N)))
    u = x / math.sqrt(p.N)
    return p.A * x / (1.0 + np.sqrt(1.0 + u)) + 0.5 * p.B * x


def sum_ztilde(p: SumParams, cfg: OracleConfig = DEFAULT_CONFIG, full: bool = False) -> Evaluation:
    """sum_n P_N(n) exp(i (A sqrt(n) + B n / (2 sqrt N)))."""
    if full:
        _check_limit(p.N, FULL_SUM_LIMIT, "full-sum")
        n_max, bound = _full_range(p.N, cfg)
        n = np.arange(0, n_max + 1, dtype=float)
        method = Method.FULL_SUM
    else:
        _check_limit(p.N, cfg.oracle_n_limit, "oracle")
        n = _window_indices(p.N, cfg)
        bound = tail_weight_bound(p.N)
        method = Method.WINDOWED_SUM
    x = (n - p.N) / math.sqrt(p.N)
    acc = _accumulate(log_poisson(n, p.N), _ztilde_local(x, p))
    return Evaluation(_rotate(common_phase(p), acc), method, p.as_dict(), bound)


def double_common_phase(d: DoubleSumParams) -> float:
    """sqrt(N) (a1 + a2 + b3 + (b1 + b2)/2) mod 2*pi."""
    hi, lo = tf.two_sum(d.a1, d.a2)
    hi, e = tf.two_sum(hi, d.b3)
    lo += e
    hi, e = tf.two_sum(hi, 0.5 * d.b1)
    lo += e
    hi, e = tf.two_sum(hi, 0.5 * d.b2)
    lo += e
    return global_phase(hi, d.N, lo)


def sum_zdouble(d: DoubleSumParams, cfg: OracleConfig = DEFAULT_CONFIG) -> Evaluation:
    """The bilinear double sum over the product window, row by row in m.

    Phase: (a1 m + a2 n)/sqrt(N) + (b1 m^2 + b2 n^2 + 2 b3 m n) / (2 N^1.5).
    """
    _check_limit(d.N, DOUBLE_SUM_LIMIT, "double-sum")
    N = d.N
    rn = math.sqrt(N)
    idx = _window_indices(N, cfg)
    x = (idx - N) / rn
    log_w = log_poisson(idx, N)
    w = np.exp(log_w)
    # local phase: alpha x + beta y + (b1 x^2 + b2 y^2 + 2 b3 x y) / (2 sqrt N)
    col = d.beta * x + d.b2 * x * x / (2.0 * rn)
    row = d.alpha * x + d.b1 * x * x / (2.0 * rn)
    cross = d.b3 / rn
    re_rows = np.empty(len(x))
    im_rows = np.empty(len(x))
    for i, (xm, wm) in enumerate(zip(x, w)):
        ph = row[i] + col + cross * xm * x
        t = wm * w
        re_rows[i] = math.fsum(t * np.cos(ph))
        im_rows[i] = math.fsum(t * np.sin(ph))
    acc = complex(math.fsum(re_rows), math.fsum(im_rows))
    if not (math.isfinite(acc.real) and math.isfinite(acc.imag)):
        raise FloatingPointError("non-finite accumulation")
    tw = tail_weight_bound(N)
    return Evaluation(_rotate(double_common_phase(d), acc), Method.WINDOWED_SUM,
                      d.as_dict(), 2.0 * tw)


def tail_weight_exact(N: float, cfg: OracleConfig = DEFAULT_CONFIG) -> float:
    """Poisson mass outside the window, summed directly over both tails."""
    _check_limit(N, cfg.oracle_n_limit, "oracle")
    w, _ = window(N, cfg.widen)
    rn = math.sqrt(N)
    span = 40.0 * rn + 40.0  # beyond this the mass is < exp(-400)
    left = np.arange(max(0, math.floor(N - span)), w.n_lo, dtype=float)
    right = np.arange(w.n_hi + 1, math.ceil(N + span) + 1, dtype=float)
    return math.fsum(np.concatenate([np.exp(log_poisson(left, N)), np.exp(log_poisson(right, N))]))


def sum_zf(profile, q: float, N: float, cfg: OracleConfig = DEFAULT_CONFIG,
           subpanels: int = 4) -> Evaluation:
    """Windowed sum of P_N(n) F(n/sqrt N) exp(i q n^2 / (2 N^1.5)).

    F(x) = (1/sqrt(2 pi)) int F~(p) exp(i p x) dp is computed from the
    profile by Gauss-Legendre quadrature at every window point.
    """
    _check_limit(N, cfg.oracle_n_limit, "oracle")
    rn = math.sqrt(N)
    n = _window_indices(N, cfg)
    x = (n - N) / rn
    # F(n/sqrt N) = F(sqrt N + x); write e^{i p (sqrt N + x)} = e^{i p sqrt N} e^{i p x}
    nodes, weights = profile.gauss_nodes(subpanels)
    ftilde = profile(nodes)
    big = global_phase(nodes, N)  # p sqrt(N) mod 2 pi, per node
    coef = weights * ftilde * np.exp(1j * big) / math.sqrt(2.0 * math.pi)
    F = np.exp(1j * np.outer(x, nodes)) @ coef
    chirp_p = SumParams(0.0, q, N)
    terms = np.exp(log_poisson(n, N)) * F * np.exp(1j * local_phase(x, chirp_p))
    acc = complex(math.fsum(terms.real), math.fsum(terms.imag))
    params = {"q": q, "N": N, "p_min": profile.p_min, "p_max": profile.p_max}
    return Evaluation(_rotate(common_phase(chirp_p), acc), Method.WINDOWED_SUM, params,
                      tail_weight_bound(N))
