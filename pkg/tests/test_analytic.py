import random

import mpmath
import pytest

from nfclass.analytic import (
    Accept, ContinueWith, Method, bf_weighted_sum, euler_partial, euler_statistics,
    expected_hR, fp_error_budget, stop_check,
)
from nfclass.core_arith.intervals import hi, lo
from nfclass.errors import XTooSmall
from nfclass.oracle import quadratic_log_residue

from corpus import RESIDUE_CORPUS, quadratic_poly


def _within(est, truth):
    return abs(est.log_residue - truth) <= est.trunc_error + est.fp_error


def test_rational_field_cancels(field):
    Q = field(1, -1)
    for X in (69, 70, 100, 257, 1000, 1024, 2048, 3001, 4096, 5000, 7919, 10000,
              10 ** 4 + 7, 20000, 30000, 40000, 50000, 65536, 80000, 100000):
        assert bf_weighted_sum(Q, X).log_residue == 0
    assert euler_partial(Q, 5000).log_residue == 0


def test_gaussian_euler_and_weighted(field):
    K = field(1, 0, 1)
    truth = mpmath.log(mpmath.pi / 4)
    e = euler_partial(K, 10 ** 5)
    assert e.method is Method.EULER and e.X == 10 ** 5
    assert abs(mpmath.exp(e.log_residue) - mpmath.pi / 4) < e.trunc_error
    b = bf_weighted_sum(K, 10 ** 5)
    assert b.method is Method.WEIGHTED
    assert _within(b, truth)


def test_sqrt5_weighted(field):
    K = field(1, -1, -1)
    phi = (1 + mpmath.sqrt(5)) / 2
    truth = mpmath.log(2 * mpmath.log(phi) / mpmath.sqrt(5))
    assert _within(bf_weighted_sum(K, 10 ** 4), truth)


def test_small_x(field):
    K = field(1, 0, 1)
    with pytest.raises(XTooSmall):
        bf_weighted_sum(K, 68)
    with pytest.raises(XTooSmall):
        euler_partial(K, 1)
    assert euler_partial(K, 1000).trunc_error == mpmath.inf
    assert mpmath.isfinite(euler_partial(K, 1001).trunc_error)


def test_errors_finite_nonnegative(field):
    for f in RESIDUE_CORPUS[:6]:
        K = field(*f)
        for est in (euler_partial(K, 5000), bf_weighted_sum(K, 5000)):
            assert 0 <= est.fp_error < 1e-20
            assert 0 <= est.trunc_error < mpmath.inf


def test_residue_oracle_consistency(field):
    for f in RESIDUE_CORPUS:
        K = field(*f)
        truth = quadratic_log_residue(K)
        for est in (euler_partial(K, 20000), bf_weighted_sum(K, 20000)):
            assert _within(est, truth), (f, est)


def test_monotone_truncation(field):
    from nfclass.analytic import bach94_bound
    for f in RESIDUE_CORPUS[::3]:
        K = field(*f)
        for X in (2000, 4000, 8000):
            a = euler_partial(K, X).log_residue
            b = euler_partial(K, 2 * X).log_residue
            assert abs(a - b) <= bach94_bound(K, X)


def test_fp_error_budget():
    assert fp_error_budget(1e10, 100, 8, 2.0 ** -52) < 1e-10
    assert fp_error_budget(1e10, 100, 8, 2.0 ** -24) < 0.01
    assert fp_error_budget(1e10, 100, 8, 0) == 0
    base = fp_error_budget(1e6, 10, 4, 2.0 ** -52)
    for bigger in (fp_error_budget(1e7, 10, 4, 2.0 ** -52), fp_error_budget(1e6, 11, 4, 2.0 ** -52),
                   fp_error_budget(1e6, 10, 5, 2.0 ** -52), fp_error_budget(1e6, 10, 4, 2.0 ** -51)):
        assert bigger > base


def test_expected_hR(field):
    Ki = field(1, 0, 1)
    E = expected_hR(Ki, bf_weighted_sum(Ki, 10 ** 5), 4)
    assert lo(E) <= 1 <= hi(E)
    K2 = field(1, 0, -2)
    E = expected_hR(K2, bf_weighted_sum(K2, 10 ** 5), 2)
    assert lo(E) <= 0.8813736 <= hi(E)
    K23 = field(1, -1, 6)
    E = expected_hR(K23, bf_weighted_sum(K23, 10 ** 5), 2)
    assert lo(E) <= 3 <= hi(E)


def test_stop_check_accepts_truth(field):
    K = field(1, 0, 5)
    assert isinstance(stop_check(2, K, "heuristic", 1000, 2), Accept)
    assert isinstance(stop_check(2, K, "grh", 1000, 2), Accept)


def test_stop_check_never_accepts_double_at_grh(field):
    for f, hR, w in (([1, 0, 5], 2, 2), ([1, -1, 6], 3, 2), ([1, 0, 1], 1, 4), ([1, 0, 14], 4, 2)):
        K = field(*f)
        for X in (100, 1000, 8000):
            r = stop_check(2 * hR, K, "grh", X, w)
            assert isinstance(r, ContinueWith)


def test_stop_check_heuristic_doubles(field):
    K = field(1, 0, 5)
    r = stop_check(4, K, "heuristic", 1000, 2)
    assert isinstance(r, ContinueWith) and r.X == 2000


def test_euler_statistics_trivial(field):
    s = euler_statistics([field(1, -1)], 1000)
    assert s["mean"] == 1 and s["sd"] == 0


def test_euler_statistics_small_sample(field):
    rng = random.Random(11)
    from corpus import imaginary_discriminants
    ds = rng.sample(imaginary_discriminants(3000), 20)
    s = euler_statistics([field(*quadratic_poly(d)) for d in ds], 1000)
    assert 0.95 <= s["mean"] <= 1.07
    assert s["sd"] < 0.05
