"""Closed-form asymptotic evaluators, the Z_F quadrature and the stage pipeline.

Every closed form has the shape

    exp(i * common) * a^{-1/2} * exp(-b^2 / (2a)) * (1 - i b^3 / (6 sqrt N))

with ``a = 1 - i B / sqrt(N)`` (``D`` below) and ``b = A + B`` for the basic
sum; the relatives only change ``a``, ``b`` and the common phase.  The common
phase ``sqrt(N) * (...)`` is reduced modulo 2*pi in two-float arithmetic, so
the formulas stay usable at N = 1e23.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _twofloat as tf
from . import bounds, quadrature
from .model import (
    ASYMPTOTIC_N_MIN,
    AsymptoticWarning,
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
from .oracle import DEFAULT_CONFIG, OracleConfig, double_common_phase, sum_z_windowed
from .poisson import log_poisson

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gaussian_moment(a: complex, b: float, k: int) -> complex:
    """(1/sqrt(2 pi)) int x^k exp(-a x^2/2 + i b x) dx for k in {0, 1, 3}.

    Principal branches throughout; requires Re(a) > 0.
    """
    a = complex(a)
    if not a.real > 0:
        raise ValueError(f"Re(a) must be positive, got {a!r}")
    base = np.exp(-b * b / (2.0 * a)) / np.sqrt(a)
    if k == 0:
        z = base
    elif k == 1:
        z = 1j * b / a * base
    elif k == 3:
        z = 1j * b * (3.0 * a - b * b) / a**3 * base
    else:
        raise ValueError(f"k must be 0, 1 or 3, got {k!r}")
    return complex(z)


def _check_n(N: float) -> None:
    if N < ASYMPTOTIC_N_MIN:
        warnings.warn(f"N={N!r} < {ASYMPTOTIC_N_MIN}: asymptotic formulas unreliable",
                      AsymptoticWarning, stacklevel=3)


def _gaussian_factor(a, b, rn):
    """a^{-1/2} exp(-b^2/(2a)) (1 - i b^3/(6 sqrt N)), vectorized."""
    return np.exp(-b * b / (2.0 * a)) / np.sqrt(a) * (1.0 - 1j * b**3 / (6.0 * rn))


def z_kernel(A, B: float, N: float):
    """The closed form of Z(A, B, N), vectorized over A."""
    rn = math.sqrt(N)
    A = np.asarray(A, dtype=float)
    D = 1.0 - 1j * B / rn
    hi, lo = tf.two_sum(A, 0.5 * B)
    common = global_phase(hi, N, lo)
    return np.exp(1j * common) * _gaussian_factor(D, A + B, rn)


def z_closed(p: SumParams, with_bound: bool = True) -> Evaluation:
    """Closed-form asymptotic value of Z(A, B, N), accurate to O(1/N).

    The error bound is the heuristic budget from :func:`bounds.error_budget`
    when 10 <= N <= 1e8, else absent.
    """
    _check_n(p.N)
    value = complex(z_kernel(p.A, p.B, p.N))
    eligible = p.oracle_eligible and p.N >= ASYMPTOTIC_N_MIN
    bound = bounds.error_budget(p) if with_bound and eligible else None
    return Evaluation(value, Method.CLOSED_FORM, p.as_dict(), bound)


def zs_closed(p: SumParams, s: int, reindex_phase: bool = True) -> Evaluation:
    """N^s exp(i s (A + B) / sqrt N) Z(A, B, N), with an O(N^{s-1}) error scale.

    Reindexing n -> n + s turns A into A + s B/N, which moves the global phase
    of Z by s B / sqrt(N).  ``reindex_phase=False`` drops that term and keeps
    only exp(i s A / sqrt N); the error then grows like N^{s - 1/2}.
    """
    if s not in (1, 2):
        raise ValueError(f"s must be 1 or 2, got {s!r}")
    z = z_closed(p, with_bound=False).value
    coef = p.A + p.B if reindex_phase else p.A
    theta = s * coef / p.sqrt_n
    value = p.N**s * complex(math.cos(theta), math.sin(theta)) * z
    return Evaluation(value, Method.CLOSED_FORM, {**p.as_dict(), "s": s}, p.N ** (s - 1))


#: exact second-order coefficient of sqrt(n) = sqrt(N) + x/2 - c x^2/sqrt(N) + ...
SQRT_CURVATURE = 0.125


def ztilde_closed(p: SumParams, sqrt_curvature: float = SQRT_CURVATURE) -> Evaluation:
    """Closed form for sum_n P_N(n) exp(i (A sqrt(n) + B n/(2 sqrt N))).

    a = 1 + 2 i c A / sqrt(N), b = (A + B)/2.  With the exact Taylor value
    c = 1/8 the error is O(1/N); c = 3/8 gives a variant whose error is only
    O(N^{-1/2}).
    """
    _check_n(p.N)
    rn = p.sqrt_n
    a = 1.0 + 2j * sqrt_curvature * p.A / rn
    b = 0.5 * (p.A + p.B)
    value = complex(np.exp(1j * common_phase(p)) * _gaussian_factor(a, b, rn))
    return Evaluation(value, Method.CLOSED_FORM, p.as_dict(), None)


def zdouble_closed(d: DoubleSumParams, theta: str = "split") -> Evaluation:
    """Closed form for the bilinear double sum.

    With alpha = a1 + b1 + b3, beta = a2 + b2 + b3 and D = 1 - i (b1 + b2)/sqrt(N):

        exp(i sqrt(N) sigma - Theta) / sqrt(D) (1 - i (alpha^3 + beta^3)/(6 sqrt N))

    ``theta="split"`` uses
    Theta = alpha^2/(2(1 - i b1/sqrt N)) + beta^2/(2(1 - i b2/sqrt N)) + i b3 alpha beta/sqrt(N),
    correct to O(1/N) for all coefficients.  ``theta="symmetric"`` uses
    Theta = (alpha^2 + beta^2)/(2 sqrt(D)) + i b3 alpha beta/sqrt(N), which agrees
    to O(1/N) only when b1 == b2.
    """
    _check_n(d.N)
    rn = math.sqrt(d.N)
    al, be = d.alpha, d.beta
    D = 1.0 - 1j * (d.b1 + d.b2) / rn
    cross = 1j * d.b3 * al * be / rn
    if theta == "split":
        th = al * al / (2.0 * (1.0 - 1j * d.b1 / rn)) + be * be / (2.0 * (1.0 - 1j * d.b2 / rn)) + cross
    elif theta == "symmetric":
        th = (al * al + be * be) / (2.0 * np.sqrt(D)) + cross
    else:
        raise ValueError(f"theta must be 'split' or 'symmetric', got {theta!r}")
    cubic = 1.0 - 1j * (al**3 + be**3) / (6.0 * rn)
    value = complex(np.exp(1j * double_common_phase(d) - th) / np.sqrt(D) * cubic)
    return Evaluation(value, Method.CLOSED_FORM, d.as_dict(), None)


@dataclass(frozen=True)
class FourierProfile:
    """Samples of F~(p) on a uniform grid, linearly interpolated.

    Convention: F(x) = (1/sqrt(2 pi)) int F~(p) exp(i p x) dp.
    """

    p_min: float
    step: float
    values: np.ndarray  # complex, one per grid point

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or len(vals) < 2:
            raise ValueError("profile needs at least two samples")
        if not self.step > 0:
            raise ValueError(f"step must be positive, got {self.step!r}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("profile values must be finite")

    @property
    def p_max(self) -> float:
        return self.p_min + self.step * (len(self.values) - 1)

    @property
    def grid(self) -> np.ndarray:
        return self.p_min + self.step * np.arange(len(self.values))

    def __call__(self, p):
        g = self.grid
        return np.interp(p, g, self.values.real, 0.0, 0.0) + 1j * np.interp(p, g, self.values.imag, 0.0, 0.0)

    def gauss_nodes(self, subpanels: int = 1, order: int = quadrature.ORDER):
        """Gauss-Legendre nodes and weights aligned with the sample grid."""
        t, w = np.polynomial.legendre.leggauss(order)
        edges = self.grid
        width = self.step / subpanels
        starts = (edges[:-1, None] + width * np.arange(subpanels)[None, :]).ravel()
        nodes = (starts + width / 2)[:, None] + (width / 2) * t[None, :]
        weights = np.broadcast_to((width / 2) * w, nodes.shape)
        return nodes.ravel(), weights.ravel().copy()

    @classmethod
    def from_function(cls, f, p_min: float, p_max: float, step: float) -> "FourierProfile":
        count = int(round((p_max - p_min) / step)) + 1
        grid = p_min + step * np.arange(count)
        return cls(p_min, step, np.asarray(f(grid), dtype=complex))

    @classmethod
    def from_json(cls, source) -> "FourierProfile":
        """Load ``{p_min, p_max, step, values: [[re, im], ...]}``."""
        if isinstance(source, (str, Path)):
            doc = json.loads(Path(source).read_text())
        else:
            doc = source
        vals = np.array([complex(re, im) for re, im in doc["values"]])
        prof = cls(float(doc["p_min"]), float(doc["step"]), vals)
        if "p_max" in doc and not math.isclose(prof.p_max, float(doc["p_max"]), rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"p_max {doc['p_max']!r} inconsistent with grid end {prof.p_max!r}")
        return prof

    def to_json(self) -> dict:
        return {
            "p_min": self.p_min, "p_max": self.p_max, "step": self.step,
            "values": [[v.real, v.imag] for v in self.values],
        }


def zf_quadrature(profile: FourierProfile, q: float, N: float, tol: float = 1e-10,
                  max_panels: int = 2**16) -> Evaluation:
    """(1/sqrt(2 pi)) int F~(p) Z_closed(p, q, N) dp by refined Gauss-Legendre.

    Panels are aligned with the profile grid (the interpolant is linear on
    each cell) and doubled until two refinements differ by less than ``tol``.
    """
    _check_n(N)
    if not np.any(profile.values != 0):
        return Evaluation(0j, Method.QUADRATURE, {"q": q, "N": N}, 0.0)
    diam = profile.p_max - profile.p_min
    if (diam + abs(q)) ** 2 >= math.log(N):
        warnings.warn("support too wide for ln N: (diam + |q|)^2 >= ln N", AsymptoticWarning, stacklevel=2)

    def integrand(p):
        return profile(p) * z_kernel(p, q, N) * _INV_SQRT_2PI

    res = quadrature.refine(integrand, profile.grid, 1, tol, max_panels)
    if not res.converged:
        raise quadrature.QuadratureError(
            f"no convergence: last change {res.change:.3g} with {res.panels} panels")
    params = {"q": q, "N": N, "p_min": profile.p_min, "p_max": profile.p_max}
    return Evaluation(res.value, Method.QUADRATURE, params, res.change)


@dataclass(frozen=True)
class StageReport:
    windowed_sum: complex
    integral_exact: complex
    integral_expanded: complex
    closed_form: complex
    params: SumParams

    @property
    def stages(self) -> tuple[complex, complex, complex, complex]:
        return (self.windowed_sum, self.integral_exact, self.integral_expanded, self.closed_form)

    @property
    def deltas(self) -> tuple[float, float, float]:
        s = self.stages
        return tuple(abs(s[i + 1] - s[i]) for i in range(3))

    def to_dict(self) -> dict:
        names = ("windowed_sum", "integral_exact", "integral_expanded", "closed_form")
        return {
            "method": Method.STAGE.value,
            "params": self.params.as_dict(),
            "stages": {k: {"re": v.real, "im": v.imag} for k, v in zip(names, self.stages)},
            "deltas": list(self.deltas),
        }


def _stage_integral(f, x_lo: float, x_hi: float, seed: int) -> complex:
    res = quadrature.refine(f, [x_lo, x_hi], seed, 1e-10, 2**14)
    return res.value


def stage_pipeline(p: SumParams, cfg: OracleConfig = DEFAULT_CONFIG) -> StageReport:
    """Walk Z from the windowed sum to the closed form through two integrals.

    1. the sum over the window;
    2. int over the scaled domain of sqrt(N) P_N(N + x sqrt N) e^{i phase};
    3. the same with P_N replaced by phi(x) (1 - (3x - x^3)/(6 sqrt N));
    4. the closed form.
    """
    if not p.oracle_eligible:
        raise ParameterError(f"N={p.N!r} above the oracle limit")
    N, rn = p.N, p.sqrt_n
    stage1 = sum_z_windowed(p, cfg).value
    _, dom = window(N, cfg.widen)
    rot = complex(np.exp(1j * common_phase(p)))
    seed = 4 * math.ceil(math.sqrt(2.0 * math.log(N)) * max(1.0, abs(p.A + p.B)))

    def exact(x):
        return rn * np.exp(log_poisson(N + x * rn, N) + 1j * local_phase(x, p))

    def expanded(x):
        corr = 1.0 - (3.0 * x - x**3) / (6.0 * rn)
        return _INV_SQRT_2PI * np.exp(-0.5 * x * x + 1j * local_phase(x, p)) * corr

    stage2 = rot * _stage_integral(exact, dom.x_lo, dom.x_hi, seed)
    stage3 = rot * _stage_integral(expanded, dom.x_lo, dom.x_hi, seed)
    stage4 = z_closed(p, with_bound=False).value
    return StageReport(stage1, stage2, stage3, stage4, p)
