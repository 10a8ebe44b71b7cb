import math
from fractions import Fraction

import mpmath
import pytest

from nfclass.bounds import (
    ProofLevel, bach_bound, generator_bound, heuristic_bound, minkowski_bound,
)

from corpus import DEG13, DEG13_MINKOWSKI, STRUCTURE


def _minkowski_reference(K, dps=200):
    """Independent high-precision float evaluation."""
    with mpmath.workdps(dps):
        v = (mpmath.factorial(K.n) / mpmath.mpf(K.n) ** K.n
             * (4 / mpmath.pi) ** K.r2 * mpmath.sqrt(abs(K.disc)))
        return int(mpmath.floor(v))


def test_minkowski_small(field):
    assert minkowski_bound(field(1, 0, 1)) == 1
    assert minkowski_bound(field(1, 0, 5)) == 2


def test_minkowski_degree13(field):
    K = field(*DEG13)
    assert K.n == 13 and K.r2 == 0
    assert minkowski_bound(K) == DEG13_MINKOWSKI


def test_minkowski_matches_reference(field):
    for f in STRUCTURE:
        K = field(*f)
        assert minkowski_bound(K) == _minkowski_reference(K)


def test_bach_examples(field):
    assert bach_bound(field(1, 0, 1)) == 24          # 12 log(4)^2 = 23.06
    assert bach_bound(field(1, 0, 5)) == math.ceil(12 * math.log(20) ** 2)


class _Disc:
    """Stand-in exposing only a discriminant."""
    def __init__(self, d):
        self.disc = d


def test_bach_at_e10():
    # 12 (log e^10)^2 = 1200; e^10 = 22026.47 lies between two integers
    assert bach_bound(_Disc(22026)) == 1200
    assert bach_bound(_Disc(22027)) == 1201


def test_degree13_bach_much_smaller(field):
    K = field(*DEG13)
    b = bach_bound(K)
    assert 4.9e5 < b < 5.1e5
    assert b * 10 ** 30 < minkowski_bound(K)
    assert generator_bound(K, ProofLevel.GRH) == b


def test_generator_bound_levels(field):
    assert generator_bound(field(1, 0, 1), "full") == 1
    assert generator_bound(field(1, 0, 5), ProofLevel.FULL) == 2
    for f in STRUCTURE:
        K = field(*f)
        assert generator_bound(K, "grh") <= generator_bound(K, "full")
        assert generator_bound(K, "heuristic") == heuristic_bound(K) >= 100
        assert generator_bound(K, "heuristic", heuristic=37) == 37


def test_bach_growth_is_quadratic_in_log():
    for k in range(5, 40, 5):
        d = 10 ** k + 1
        assert abs(bach_bound(_Disc(d)) / math.log(d) ** 2 - 12) < 0.1


def test_certified_floor_stable_under_precision(field):
    from nfclass import bounds
    for f in STRUCTURE[:20]:
        K = field(*f)
        a = bounds.minkowski_bound(K)
        n, r2, d = K.n, K.r2, abs(K.disc)
        q = Fraction(math.factorial(n), n ** n)
        b = bounds._certified_floor(
            lambda: bounds.iv.mpf(q.numerator) / q.denominator * (4 / bounds.iv.pi) ** r2
            * bounds.iv.sqrt(bounds.iv.mpf(d)), prec=512)
        assert a == b


def test_proof_level_parse():
    assert ProofLevel.parse("GRH") is ProofLevel.GRH
    with pytest.raises(ValueError):
        ProofLevel.parse("maybe")
