"""Residue of the Dedekind zeta function at s = 1 and the stopping rule.

Two estimators of log res_{s=1} zeta_K(s):

* the truncated Euler product A(X) (heuristic; carries Bach's GRH bound
  for X > 1000 as its truncation error), and
* the Belabas-Friedman weighted sum f_K(X), whose truncation error is
  rigorous under GRH for X >= 69.

Both are evaluated in interval arithmetic, so ``fp_error`` is the radius of
the computed interval.  Terms of K and of Q are grouped by prime power with
their net multiplicity, which makes K = Q cancel exactly.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .bounds import ProofLevel
from .core_arith.field import NumberField
from .core_arith.intervals import hi, iv, lo, mid, mp, precision, rad
from .core_arith.intmath import pmod_ddf_degrees, primes_up_to
from .errors import IntervalTooWide, XTooSmall

PREC = 128


class Method(str, enum.Enum):
    EULER = "EulerProduct"
    WEIGHTED = "WeightedSum"


@dataclass(frozen=True)
class ResidueEstimate:
    log_residue: object       # mpf, midpoint of the computed interval
    method: Method
    X: object
    trunc_error: object       # mpf upper bound, may be +inf
    fp_error: object          # mpf, radius of the computed interval

    def interval(self):
        """Interval certainly containing log res (under GRH, for finite trunc_error)."""
        with precision(PREC):
            e = self.trunc_error + self.fp_error
            if mpmath.isinf(e):
                return iv.mpf([-mpmath.inf, mpmath.inf])
            return iv.mpf([self.log_residue - e, self.log_residue + e])


# ------------------------------------------------------------ local data

def local_norms(K: NumberField, p: int, X) -> list[int]:
    """Norms N(P) < X of the primes P above p (sorted)."""
    cache = K._misc.setdefault("local_norms", {})
    maxdeg = 1
    q = p * p
    while q < X and maxdeg < K.n:
        maxdeg += 1
        q *= p
    key = (p, maxdeg)
    if key in cache:
        return [N for N in cache[key] if N < X]
    if K.n == 1:
        out = [p]
    elif K.poly_disc % p == 0:
        out = sorted(P.norm for P in K.decompose(p))
    elif K.n == 2 and p != 2:
        s = pow(K.poly_disc % p, (p - 1) // 2, p)
        out = [p, p] if s == 1 else [p * p]
    else:
        counts = pmod_ddf_degrees(list(K.f), p, maxdeg)
        out = []
        for d in sorted(counts):
            out += [p ** d] * counts[d]
    out = [N for N in out if N <= p ** maxdeg]
    cache[key] = out
    return [N for N in out if N < X]


def _net_counts(K, p, X):
    """Net multiplicity (K minus Q) of every local norm q0 < X above p."""
    net: dict[int, int] = {}
    for N in local_norms(K, p, X):
        net[N] = net.get(N, 0) + 1
    net[p] = net.get(p, 0) - 1
    return {q: c for q, c in net.items() if c}


# ------------------------------------------------------------ estimators

def bach94_bound(K: NumberField, X):
    """(2 log|d| + (0.928 n + 0.754) log X) / sqrt(X) for X > 1000, else +inf."""
    if X <= 1000:
        return mpmath.inf
    with precision(PREC):
        d = abs(K.disc)
        v = (2 * iv.log(iv.mpf(d)) + (iv.mpf("0.928") * K.n + iv.mpf("0.754")) * iv.log(iv.mpf(X))) / iv.sqrt(iv.mpf(X))
        # decimal constants are rounded outward by the interval parser
        return hi(v)


def euler_partial(K: NumberField, X: int, inner="truncated") -> ResidueEstimate:
    """log A(X), A(X) = prod_{p<X} (1-1/p) / prod_{P|p, NP<X} (1-1/NP).

    ``inner="full"`` keeps every P above p < X whatever its norm.  That
    variant has no proven truncation bound (trunc_error is +inf); it is kept
    for comparison with implementations that do not truncate.
    """
    if X < 2:
        raise XTooSmall("X must be at least 2")
    if inner not in ("truncated", "full"):
        raise ValueError("inner must be 'truncated' or 'full'")
    cut = X if inner == "truncated" else mpmath.inf
    with precision(PREC):
        acc = iv.mpf(0)
        for p in primes_up_to(int(math.ceil(X)) - 1):
            if p >= X:
                break
            net = _net_counts(K, p, cut)
            if not net:
                continue
            r = Fraction(1)
            for q, c in net.items():
                r *= Fraction(q, q - 1) ** c
            acc += iv.log(iv.mpf(r.numerator) / r.denominator)
        m, e = mid(acc), rad(acc)
    trunc = bach94_bound(K, X) if inner == "truncated" else mpmath.inf
    return ResidueEstimate(m, Method.EULER, X, trunc, e)


def bf_weighted_sum(K: NumberField, X) -> ResidueEstimate:
    """Belabas-Friedman estimate f_K(X) with its GRH truncation bound."""
    if X < 69:
        raise XTooSmall("the weighted sum needs X >= 69")
    with precision(PREC):
        Xi = iv.mpf(X)
        Y = Xi / 9
        Ymax = hi(Y)
        s1X = s2X = s1Y = s2Y = iv.mpf(0)
        logs = {}
        for p in primes_up_to(int(math.ceil(X))):
            if p >= X:
                break
            for q0, c in _net_counts(K, p, X).items():
                lq0 = logs.get(q0)
                if lq0 is None:
                    lq0 = logs[q0] = iv.log(iv.mpf(q0))
                q, m = q0, 1
                while q < X:
                    t1 = iv.mpf(c) / (m * q)
                    t2 = c * lq0 / iv.sqrt(iv.mpf(q))
                    s1X += t1
                    s2X += t2
                    if q < Ymax:
                        if q >= lo(Y):
                            raise ArithmeticError("X/9 too close to a prime power")
                        s1Y += t1
                        s2Y += t2
                    q *= q0
                    m += 1
        DX = iv.sqrt(Xi) * iv.log(Xi) * s1X - s2X
        DY = iv.sqrt(Y) * iv.log(Y) * s1Y - s2Y
        f = 3 * (DX - DY) / (2 * iv.sqrt(Xi) * iv.log(3 * Xi))
        d = abs(K.disc)
        if d == 1:
            trunc = mp.mpf(0)
        else:
            ld = iv.log(iv.mpf(d))
            C = ((1 + iv.mpf("3.88") / iv.log(Xi / 9)) * (1 + 2 / iv.sqrt(ld)) ** 2
                 + iv.mpf("4.26") * (K.n - 1) / (iv.sqrt(Xi) * ld))
            trunc = hi(iv.mpf("2.324") * ld / (iv.sqrt(Xi) * iv.log(3 * Xi)) * C)
        m, e = mid(f), rad(f)
    return ResidueEstimate(m, Method.WEIGHTED, X, trunc, e)


def fp_error_budget(X, n: int, k: int, eps) -> object:
    """eps * 2 (2 + log log X) (n + 1) * 3/2 * (k + log2(n X) + log2 X)."""
    with precision(PREC):
        if eps == 0:
            return mp.mpf(0)
        Xi = iv.mpf(X)
        v = (iv.mpf(eps) * 2 * (2 + iv.log(iv.log(Xi))) * (n + 1) * iv.mpf(3) / 2
             * (k + iv.log(n * Xi) / iv.log(2) + iv.log(Xi) / iv.log(2)))
        return hi(v)


def expected_hR(K: NumberField, est: ResidueEstimate, w: int):
    """Interval for h*R from the analytic class number formula."""
    with precision(PREC):
        scale = iv.mpf(w) * iv.sqrt(iv.mpf(abs(K.disc))) / (iv.mpf(2) ** K.r1 * (2 * iv.pi) ** K.r2)
        L = est.interval()
        if mpmath.isinf(hi(L)):
            # no truncation bound: only the computed value itself is certified
            return iv.exp(iv.mpf(est.log_residue)) * scale
        return iv.exp(L) * scale


def point_hR(K: NumberField, est: ResidueEstimate, w: int):
    """Heuristic point value of h*R (ignores the error bounds)."""
    with precision(PREC):
        scale = iv.mpf(w) * iv.sqrt(iv.mpf(abs(K.disc))) / (iv.mpf(2) ** K.r1 * (2 * iv.pi) ** K.r2)
        return mid(iv.exp(iv.mpf(est.log_residue)) * scale)


# ------------------------------------------------------------ stop rule

@dataclass(frozen=True)
class Accept:
    X: object
    ratio: object
    estimate: ResidueEstimate


@dataclass(frozen=True)
class ContinueWith:
    X: object
    ratio: object
    estimate: ResidueEstimate


def stop_check(candidate_hR, K: NumberField, level, X_state, w: int,
               tolerance=0.05, max_X=10 ** 7, euler_inner="truncated"):
    """Decide whether a candidate h*R is consistent with the analytic estimate.

    Heuristic and Full levels use the doubling rule: compare with the Euler
    product at X_state and double X on a relative mismatch above
    ``tolerance``.  The GRH level accepts only when the rigorous ratio
    interval lies below 2; since the candidate is a positive integer
    multiple of the truth this proves equality.  A ratio interval that
    straddles 2 doubles X; a candidate certainly >= 2x the estimate keeps X.
    """
    level = ProofLevel.parse(level)
    with precision(PREC):
        cand = candidate_hR if not isinstance(candidate_hR, (int, float, Fraction)) else iv.mpf(candidate_hR)
        if level is ProofLevel.GRH:
            est = bf_weighted_sum(K, X_state)
            E = expected_hR(K, est, w)
            ratio = cand / E
            if hi(ratio) < 2:
                return Accept(X_state, ratio, est)
            if lo(ratio) >= 2:
                return ContinueWith(X_state, ratio, est)
            if X_state * 2 > max_X:
                raise IntervalTooWide("ratio interval straddles 2 at the largest allowed X")
            return ContinueWith(X_state * 2, ratio, est)
        est = euler_partial(K, X_state, euler_inner)
        ratio = mid(cand) / point_hR(K, est, w)
        if abs(ratio - 1) <= tolerance:
            return Accept(X_state, ratio, est)
        return ContinueWith(X_state * 2, ratio, est)


# ------------------------------------------------------------ statistics

def euler_statistics(sample, X: int, true_log_residues=None):
    """Moments of A(X)/res over a sample of fields.

    ``true_log_residues`` gives log res for each field; when omitted the
    quadratic oracles are used (the sample must then be quadratic or Q).
    Kurtosis is the non-excess (Pearson) kurtosis.
    """
    sample = list(sample)
    if true_log_residues is None:
        from .oracle import quadratic_log_residue
        true_log_residues = [quadratic_log_residue(K) for K in sample]
    vals = []
    with precision(PREC):
        for K, t in zip(sample, true_log_residues):
            est = euler_partial(K, X)
            vals.append(float(mpmath.exp(est.log_residue - t)))
    mean = statistics.fmean(vals)
    if len(vals) < 2:
        return {"mean": mean, "sd": 0.0, "skewness": 0.0, "kurtosis": 0.0, "values": vals}
    m2 = statistics.fmean((v - mean) ** 2 for v in vals)
    m3 = statistics.fmean((v - mean) ** 3 for v in vals)
    m4 = statistics.fmean((v - mean) ** 4 for v in vals)
    sd = math.sqrt(m2)
    skew = m3 / m2 ** 1.5 if m2 > 0 else 0.0
    kurt = m4 / m2 ** 2 if m2 > 0 else 0.0
    return {"mean": mean, "sd": sd, "skewness": skew, "kurtosis": kurt, "values": vals}


__all__ = ["Method", "ResidueEstimate", "euler_partial", "bf_weighted_sum",
           "bach94_bound", "fp_error_budget", "expected_hR", "point_hR",
           "stop_check", "Accept", "ContinueWith", "euler_statistics", "local_norms"]
