"""Generator-norm bounds for the three proof levels."""

from __future__ import annotations

import enum
import math
from fractions import Fraction

import mpmath

from .core_arith.field import NumberField
from .core_arith.intervals import hi, iv, lo, precision


class ProofLevel(str, enum.Enum):
    HEURISTIC = "heuristic"
    GRH = "grh"
    FULL = "full"

    @classmethod
    def parse(cls, s):
        if isinstance(s, ProofLevel):
            return s
        return cls(str(s).lower())


def _certified_floor(fn, prec=128):
    """floor of a positive quantity computed as an interval; raise precision until certain."""
    p = prec
    for _ in range(8):
        with precision(p):
            x = fn()
            a, b = int(mpmath.floor(lo(x))), int(mpmath.floor(hi(x)))
        if a == b:
            return int(a)
        p *= 2
    raise ArithmeticError("could not certify floor")


def _certified_ceil(fn, prec=128):
    p = prec
    for _ in range(8):
        with precision(p):
            x = fn()
            a, b = int(mpmath.ceil(lo(x))), int(mpmath.ceil(hi(x)))
        if a == b:
            return int(a)
        p *= 2
    raise ArithmeticError("could not certify ceiling")


def minkowski_bound(K: NumberField) -> int:
    """floor((n!/n^n) (4/pi)^r2 sqrt|d|)."""
    n, r2, d = K.n, K.r2, abs(K.disc)
    if r2 == 0:
        # q sqrt(d) with q rational: floor(sqrt(q^2 d)) = isqrt(floor(q^2 d)), exact
        q = Fraction(math.factorial(n), n ** n)
        t = q * q * d
        return math.isqrt(t.numerator // t.denominator)

    def val():
        return (iv.mpf(math.factorial(n)) / iv.mpf(n) ** n
                * (4 / iv.pi) ** r2 * iv.sqrt(iv.mpf(d)))
    # the bound needs enough bits to separate it from the nearest integer
    prec = max(128, 4 * d.bit_length() + 64)
    return _certified_floor(val, prec)


def bach_bound(K: NumberField) -> int:
    """ceil(12 (log|d|)^2); for |d| = 1 this is 0."""
    d = abs(K.disc)
    if d < 2:
        return 0
    return _certified_ceil(lambda: 12 * iv.log(iv.mpf(d)) ** 2)


def heuristic_bound(K: NumberField) -> int:
    """Default working bound max(100, (log|d|)^2 / 2)."""
    d = abs(K.disc)
    if d < 2:
        return 100
    return max(100, _certified_ceil(lambda: iv.log(iv.mpf(d)) ** 2 / 2))


def generator_bound(K: NumberField, level, heuristic=None) -> int:
    level = ProofLevel.parse(level)
    if level is ProofLevel.FULL:
        return minkowski_bound(K)
    if level is ProofLevel.GRH:
        return min(minkowski_bound(K), bach_bound(K))
    return heuristic if heuristic is not None else heuristic_bound(K)


__all__ = ["ProofLevel", "minkowski_bound", "bach_bound", "heuristic_bound",
           "generator_bound"]
