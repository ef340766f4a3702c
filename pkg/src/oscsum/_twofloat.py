"""Error-free transformations on binary64 values (scalars or numpy arrays).

A "two-float" is an unevaluated sum ``hi + lo`` with ``|lo| <= ulp(hi)/2``.
Only what the phase reduction needs is provided here.
"""
import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1

# 2*pi = TWO_PI_HI + TWO_PI_MID + TWO_PI_LO to ~160 bits
TWO_PI_HI = 6.283185307179586
TWO_PI_MID = 2.4492935982947064e-16
TWO_PI_LO = -5.989539619436679e-33


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def fast_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    return s, b - (s - a)


def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def mul(a, b):
    """Product of two two-floats, returned as a two-float."""
    ah, al = a
    bh, bl = b
    p, e = two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return fast_two_sum(p, e)


def sqrt(x):
    """Square root of a binary64 value as a two-float."""
    s = np.sqrt(x)
    p, e = two_prod(s, s)
    lo = ((x - p) - e) / (2.0 * s)
    return fast_two_sum(s, lo)


def reduce_two_pi(x):
    """Reduce a two-float modulo 2*pi into [-pi, pi].

    Cody-Waite style: ``k * TWO_PI_HI`` is formed exactly, so the result is
    accurate to a few ulps of 2*pi for |x| up to ~1e15.  The reduction is odd:
    ``reduce_two_pi(-x) == -reduce_two_pi(x)`` bit for bit.
    """
    xh, xl = x
    k = np.rint(xh / TWO_PI_HI)
    p, e = two_prod(k, TWO_PI_HI)
    r = xh - p  # exact: xh and p agree to within 2*pi
    r = r - e
    r = r - k * TWO_PI_MID
    r = r - k * TWO_PI_LO
    r = r + xl
    if np.ndim(r) == 0:
        return float(r)
    return r
