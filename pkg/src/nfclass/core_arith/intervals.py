"""Small helpers around mpmath's interval context."""

from __future__ import annotations

from contextlib import contextmanager
from fractions import Fraction
import threading

import mpmath
from mpmath import iv, mp

_lock = threading.RLock()


@contextmanager
def precision(bits: int):
    """Set both the interval and the float context to ``bits`` bits."""
    with _lock:
        old_iv, old_mp = iv.prec, mp.prec
        iv.prec = bits
        mp.prec = bits
        try:
            yield
        finally:
            iv.prec, mp.prec = old_iv, old_mp


def lo(x):
    return mp.make_mpf(x._mpi_[0])


def hi(x):
    return mp.make_mpf(x._mpi_[1])


def mid(x):
    a, b = lo(x), hi(x)
    return (a + b) / 2


def rad(x):
    """Upper bound for the radius of an interval, as an mpf."""
    a, b = x._mpi_
    with mp.workprec(mp.prec + 10):
        r = (mp.make_mpf(b) - mp.make_mpf(a)) / 2
    return r


def ball(center, radius):
    """Interval [center - radius, center + radius] with outward rounding."""
    c = iv.mpf(center)
    r = iv.mpf(radius)
    return c + iv.mpf([-hi(r), hi(r)])


def from_fraction(q: Fraction):
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def contains(x, value) -> bool:
    """True if the interval x certainly contains the exact rational/int value."""
    v = iv.mpf(value) if not isinstance(value, Fraction) else from_fraction(value)
    return lo(x) <= lo(v) and hi(v) <= hi(x)


def hull(xs):
    a = min(lo(x) for x in xs)
    b = max(hi(x) for x in xs)
    return iv.mpf([a, b])


def to_pair(x):
    """(value, error_radius) as mpf for JSON output."""
    return mid(x), rad(x)


__all__ = ["precision", "lo", "hi", "mid", "rad", "ball", "from_fraction",
           "contains", "hull", "to_pair", "iv", "mp", "mpmath"]
