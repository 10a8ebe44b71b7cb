"""Certification of the maximal order.

Only primes p with p^2 | disc(f) can divide the index of Z[alpha].  At each
such prime we first apply Dedekind's criterion to Z[alpha]; if it fails we
enlarge by the multiplier ring of the p-radical until the order is stable,
which is exactly the p-maximality test of Pohst and Zassenhaus.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from sympy import Poly, discriminant, symbols

from ..errors import MaximalityUnverified
from .intmath import (
    bareiss_det, factor_integer, hnf_lower_mod, ilog_ceil, lower_solve,
    nullspace_mod, pmod_divmod, pmod_factor, pmod_gcd, pmod_mul, pmod_trim,
)

_x = symbols("x")


def poly_discriminant(f) -> int:
    """Discriminant of a polynomial given low-first."""
    if len(f) == 2:
        return 1
    return int(discriminant(Poly(list(reversed(f)), _x)))


def poly_mulmod(a, b, f):
    """Product of two rational polynomials modulo monic f (all low-first)."""
    n = len(f) - 1
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    prod[i + j] += x * y
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for i in range(n):
                prod[k - n + i] -= c * f[i]
        prod[k] = 0
    prod = prod[:n] + [0] * (n - len(prod))
    return prod


def dedekind_is_maximal(f, p: int) -> bool:
    """Dedekind's criterion: is Z[alpha] p-maximal?"""
    facs = pmod_factor(f, p)
    g = [1]
    h = [1]
    for gi, e in facs:
        g = _zmul(g, gi)
        for _ in range(e - 1):
            h = _zmul(h, gi)
    gh = _zmul(g, h)
    diff = [a - b for a, b in zip(gh + [0] * (len(f) - len(gh)), f)]
    assert all(c % p == 0 for c in diff)
    F = [c // p for c in diff]
    d = pmod_gcd(F, g, p)
    d = pmod_gcd(d, h, p) if d else pmod_gcd(g, h, p)
    return len(pmod_trim(list(d))) <= 1


def _zmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


class OrderBasis:
    """Basis w_i = (num[i] . (1, alpha, ...)) / den with a multiplication table."""

    def __init__(self, f, num, den):
        self.f = list(f)
        self.n = len(f) - 1
        self.num = [list(r) for r in num]
        self.den = den
        self.mt = self._mult_table()

    def to_coords(self, v):
        """Coordinates (Fractions) of a power-basis vector v (rationals)."""
        n = self.n
        w = [Fraction(c) * self.den for c in v]
        c = [Fraction(0)] * n
        for j in range(n - 1, -1, -1):
            if w[j]:
                q = w[j] / self.num[j][j]
                c[j] = q
                row = self.num[j]
                for k in range(j + 1):
                    w[k] -= q * row[k]
        return c

    def _mult_table(self):
        n = self.n
        mt = [[None] * n for _ in range(n)]
        d2 = self.den * self.den
        for i in range(n):
            for j in range(i, n):
                prod = poly_mulmod(self.num[i], self.num[j], self.f)
                c = self.to_coords([Fraction(x, d2) for x in prod])
                if any(x.denominator != 1 for x in c):
                    raise ArithmeticError("basis does not span a ring")
                mt[i][j] = mt[j][i] = tuple(int(x) for x in c)
        return mt

    def mul(self, a, b, p=None):
        n = self.n
        out = [0] * n
        mt = self.mt
        for i, x in enumerate(a):
            if x:
                row = mt[i]
                for j, y in enumerate(b):
                    if y:
                        xy = x * y
                        for k, c in enumerate(row[j]):
                            if c:
                                out[k] += xy * c
        if p is not None:
            out = [c % p for c in out]
        return out

    def pow_mod(self, a, e, p):
        result = [1] + [0] * (self.n - 1)
        base = [c % p for c in a]
        while e:
            if e & 1:
                result = self.mul(result, base, p)
            e >>= 1
            if e:
                base = self.mul(base, base, p)
        return result


def p_radical(order: OrderBasis, p: int):
    """F_p-basis (lifted to integers) of the p-radical modulo pO."""
    n = order.n
    j = ilog_ceil(n, p)
    q = p ** j
    images = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        images.append(order.pow_mod(e, q, p))
    return nullspace_mod(images, p)


def _multiplier_step(order: OrderBasis, p: int):
    """Return the HNF (in order coordinates) of U = {y : y I_p in p I_p}, or None if p-maximal."""
    n = order.n
    rad = p_radical(order, p)
    H = hnf_lower_mod(rad, p, n)
    rows = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        big = []
        for g in H:
            z = lower_solve(H, order.mul(e, g))
            big.extend(c % p for c in z)
        rows.append(big)
    kern = nullspace_mod(rows, p)
    if not kern:
        return None
    return hnf_lower_mod(kern, p, n)


def _normalise(num, den):
    n = len(num)
    D = abs(bareiss_det(num))
    H = [list(r) for r in hnf_lower_mod(num, D, n)]
    g = den
    for r in H:
        for c in r:
            g = gcd(g, c)
    if g > 1:
        H = [[c // g for c in r] for r in H]
        den //= g
    return H, den


def maximal_order(f, disc_f=None, factored=None):
    """Return (OrderBasis, disc_K, certificate) for monic irreducible f (low-first).

    The certificate maps every prime p with p^2 | disc(f) to the method that
    proved p-maximality and the number of enlargement steps taken.
    """
    n = len(f) - 1
    if disc_f is None:
        disc_f = poly_discriminant(f)
    if factored is None:
        factored = factor_integer(disc_f)
    order = OrderBasis(f, [[1 if i == j else 0 for j in range(n)] for i in range(n)], 1)
    cert = {}
    for p, e in factored.items():
        if e < 2:
            continue
        if dedekind_is_maximal(f, p):
            cert[p] = ("dedekind", 0)
            continue
        steps = 0
        while True:
            U = _multiplier_step(order, p)
            if U is None:
                break
            steps += 1
            if steps > e // 2:
                raise MaximalityUnverified(f"enlargement at p={p} did not stabilise")
            num = [[sum(U[i][k] * order.num[k][j] for k in range(n)) for j in range(n)]
                   for i in range(n)]
            num, den = _normalise(num, order.den * p)
            order = OrderBasis(f, num, den)
        cert[p] = ("radical", steps)
    det = Fraction(bareiss_det(order.num), order.den ** n)
    disc = Fraction(disc_f) * det * det
    if disc.denominator != 1:
        raise MaximalityUnverified("non-integral discriminant")
    return order, int(disc), cert


__all__ = ["OrderBasis", "maximal_order", "poly_discriminant", "poly_mulmod",
           "dedekind_is_maximal", "p_radical", "pmod_divmod", "pmod_mul"]
