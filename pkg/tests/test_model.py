import math
import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from oscsum import model
from oscsum.model import ParameterError, SumParams, validate


def mp_reduced_phase(A, B, N):
    """sqrt(N) * (A + B/2) reduced into [-pi, pi] with 200-bit arithmetic."""
    with mpmath.workprec(200):
        x = mpmath.sqrt(mpmath.mpf(N)) * (mpmath.mpf(A) + mpmath.mpf(B) / 2)
        twopi = 2 * mpmath.pi
        r = x - twopi * mpmath.nint(x / twopi)
        return float(r)


def test_validate_ok_and_eligibility():
    p = validate(0.5, 0.3, 1e6)
    assert p.oracle_eligible and p.full_sum_eligible
    big = validate(0.5, 0.3, 1e23)
    assert not big.oracle_eligible


@pytest.mark.parametrize("args", [(0, 0, -1), (0, 0, 0), (math.nan, 0, 10), (0, math.inf, 10), (0, 0, math.inf)])
def test_validate_rejects(args):
    with pytest.raises(ParameterError):
        validate(*args)


def test_small_n_warns_but_passes():
    with pytest.warns(model.AsymptoticWarning):
        p = validate(0.1, 0.1, 5)
    assert p.N == 5


def test_scale_index():
    assert model.scale_index(1e4, 1e4) == 0
    assert model.scale_index(10100, 10000) == 1.0
    N = 1e4
    edge = N + math.sqrt(2 * N * math.log(N))
    assert model.scale_index(edge, N) == pytest.approx(math.sqrt(2 * math.log(N)), rel=1e-14)


def test_phase_examples():
    p = validate(0.5, 0.3, 1e4)
    assert model.phase(0, p) == 0
    assert model.phase(p.N, p) == pytest.approx(math.sqrt(p.N) * (p.A + p.B / 2), rel=1e-15)
    assert model.phase(1, validate(1, 0, 100)) == pytest.approx(0.1, rel=1e-15)


def test_common_phase_reference_value():
    # 100 * 0.65 = 65; 65 mod 2pi from mpmath
    p = validate(0.5, 0.3, 1e4)
    assert model.common_phase(p) == pytest.approx(2.1681469282041352, abs=2e-15)
    assert model.local_phase(0.0, p) == 0.0


@pytest.mark.parametrize("N", [1e4, 12345.678, 1e12, 3.7e17, 1e23])
@pytest.mark.parametrize("A,B", [(0.5, 0.3), (-2.9, 1.7), (3.0, 3.0), (1e-3, -2.5)])
def test_common_phase_matches_extended_precision(A, B, N):
    assert model.common_phase(SumParams(A, B, N)) == pytest.approx(mp_reduced_phase(A, B, N), abs=4e-15)


def test_naive_reduction_is_hopeless_at_physical_scale():
    p = SumParams(0.5, 0.3, 1e23)
    naive = math.remainder(math.sqrt(p.N) * (p.A + p.B / 2), 2 * math.pi)
    ref = mp_reduced_phase(p.A, p.B, p.N)
    assert abs(naive - ref) > 1e-6
    assert model.common_phase(p) == pytest.approx(ref, abs=4e-15)


def test_common_phase_is_odd():
    for A, B, N in [(0.5, 0.3, 1e23), (1.1, -0.7, 1e4), (2.5, 2.5, 3e11)]:
        assert model.common_phase(SumParams(-A, -B, N)) == -model.common_phase(SumParams(A, B, N))


@settings(max_examples=60, deadline=None)
@given(
    A=st.floats(-3, 3), B=st.floats(-3, 3),
    N=st.sampled_from([1e2, 1e3, 1e4, 1e5, 1e6]),
    t=st.floats(-1, 1),
)
def test_phase_decomposition_reconstructs(A, B, N, t):
    p = SumParams(A, B, N)
    x = t * math.sqrt(2 * math.log(N))
    n = N + x * math.sqrt(N)
    with mpmath.workprec(200):
        nn = mpmath.mpf(N) + mpmath.mpf(x) * mpmath.sqrt(mpmath.mpf(N))
        exact = (mpmath.mpf(A) * nn / mpmath.sqrt(N) + mpmath.mpf(B) * nn**2 / (2 * mpmath.mpf(N) ** 1.5))
        exact = float(exact - 2 * mpmath.pi * mpmath.nint(exact / (2 * mpmath.pi)))
    g, loc = model.phase_decomposed(x, p)
    diff = math.remainder(g + loc - exact, 2 * math.pi)
    assert abs(diff) <= 1e-8
    # moderate N: raw phase agrees too
    raw = model.phase(n, p)
    assert abs(math.remainder(raw - g - loc, 2 * math.pi)) <= 1e-8


def test_window_examples():
    w, d = model.window(1e4)
    assert (w.n_lo, w.n_hi) == (9571, 10429)
    assert d.x_lo == pytest.approx(-4.291932052578694, abs=1e-12)
    assert d.x_hi == pytest.approx(4.291932052578694, abs=1e-12)
    w2, _ = model.window(100, 2.0)
    assert (w2.n_lo, w2.n_hi) == (40, 160)  # half-width 60.697


def test_window_clamps_at_zero():
    w, d = model.window(12, 3.0)
    assert w.n_lo == 0
    assert d.x_lo == -math.sqrt(12)


def test_window_edge_maps_to_domain_edge():
    for N in (1e3, 1e4, 1e5, 1e6, 1e8):
        w, d = model.window(N)
        assert abs(model.scale_index(w.n_lo, N) - d.x_lo) <= 1 / math.sqrt(N)
        assert abs(model.scale_index(w.n_hi, N) - d.x_hi) <= 1 / math.sqrt(N)


@given(N=st.floats(11, 1e9), a=st.floats(1, 4), b=st.floats(1, 4))
def test_window_monotone_in_widen(N, a, b):
    lo, hi = sorted((a, b))
    w1, _ = model.window(N, lo)
    w2, _ = model.window(N, hi)
    assert w2.n_lo <= w1.n_lo and w1.n_hi <= w2.n_hi


def test_window_rejects():
    with pytest.raises(ParameterError):
        model.window(1.0)
    with pytest.raises(ParameterError):
        model.window(100, 0.5)


def test_evaluation_invariants():
    ev = model.Evaluation(1 + 2j, model.Method.CLOSED_FORM, {"A": 0.0}, 0.5)
    d = ev.to_dict()
    assert d["value"] == {"re": 1.0, "im": 2.0, "abs": abs(1 + 2j), "arg": math.atan2(2, 1)}
    with pytest.raises(ValueError):
        model.Evaluation(1j, model.Method.CLOSED_FORM, {}, -1.0)
    with pytest.raises(FloatingPointError):
        model.Evaluation(complex(math.nan, 0), model.Method.CLOSED_FORM)


def test_double_params_validation():
    with pytest.raises(ParameterError):
        model.DoubleSumParams(0, 0, 0, 0, 0, -5)
    d = model.DoubleSumParams(0.3, 0.2, 0.1, 0.15, 0.05, 1e4)
    assert d.alpha == pytest.approx(0.45)
    assert d.beta == pytest.approx(0.4)
    assert d.swapped().swapped() == d
