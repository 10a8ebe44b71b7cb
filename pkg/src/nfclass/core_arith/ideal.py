"""Integral ideals as lower-triangular HNF lattices; prime ideals above p."""

from __future__ import annotations

import random
from math import gcd

from ..errors import ZeroElement
from .field import FieldElement, NumberField, mul_coords
from .intmath import (
    hnf_lower_mod, ilog_ceil, lower_solve, nullspace_mod, pmod_factor, rank_mod,
)


class Ideal:
    """Integral ideal of O_K given by a lower-triangular row HNF.

    Rows are integral-basis coordinates of a Z-basis.  ``hnf[0][0]`` is the
    least positive integer in the ideal.
    """

    __slots__ = ("K", "hnf", "norm", "_gens2")

    def __init__(self, K: NumberField, hnf, gens2=None):
        self.K = K
        self.hnf = tuple(tuple(r) for r in hnf)
        n = 1
        for i, r in enumerate(self.hnf):
            n *= r[i]
        self.norm = n
        self._gens2 = gens2

    # construction -------------------------------------------------------
    @classmethod
    def from_zgens(cls, K, vectors, modulus, gens2=None):
        return cls(K, hnf_lower_mod(vectors, modulus, K.n), gens2)

    @classmethod
    def principal(cls, K, x: FieldElement):
        if x.is_zero():
            raise ZeroElement("zero ideal")
        if not x.is_integral():
            raise ValueError("principal ideal of a non-integral element")
        N = abs(x.norm().numerator)
        rows = x.mult_matrix()
        return cls.from_zgens(K, rows, N, gens2=(N, x))

    @classmethod
    def two_element(cls, K, a: int, b: FieldElement):
        """Ideal (a, b) with a a positive integer and b integral."""
        rows = [[a if i == j else 0 for j in range(K.n)] for i in range(K.n)]
        rows += b.mult_matrix()
        return cls.from_zgens(K, rows, a, gens2=(a, b))

    @classmethod
    def unit(cls, K):
        return cls(K, [[1 if i == j else 0 for j in range(K.n)] for i in range(K.n)],
                   gens2=(1, K.one))

    # basic queries ------------------------------------------------------
    def __eq__(self, other):
        return isinstance(other, Ideal) and self.K is other.K and self.hnf == other.hnf

    def __hash__(self):
        return hash(self.hnf)

    def __repr__(self):
        return f"Ideal(norm={self.norm}, hnf={[list(r) for r in self.hnf]})"

    @property
    def min_int(self):
        return self.hnf[0][0]

    def is_one(self):
        return self.norm == 1

    def zbasis(self):
        return [FieldElement.make(self.K, r) for r in self.hnf]

    def contains(self, x: FieldElement) -> bool:
        if not x.is_integral():
            return False
        return lower_solve(self.hnf, x.coords) is not None

    def gens2(self):
        """Two O-generators (m, beta) with m the least positive integer."""
        if self._gens2 is not None:
            return self._gens2
        K = self.K
        m = self.min_int
        rng = random.Random(hash(self.hnf) & 0xFFFFFFFF)
        basis = self.hnf
        cand = [FieldElement.make(K, r) for r in basis]
        tries = [c for c in cand[1:]] + [None] * 200
        for c in tries:
            if c is None:
                coef = [rng.randrange(-3, 4) for _ in basis]
                c = FieldElement.make(K, [sum(coef[i] * basis[i][k] for i in range(K.n))
                                          for k in range(K.n)])
            if c.is_zero():
                continue
            if Ideal.two_element(K, m, c) == self:
                self._gens2 = (m, c)
                return self._gens2
        # always correct, though slower for products
        self._gens2 = None
        return None

    # arithmetic ---------------------------------------------------------
    def __mul__(self, other: "Ideal") -> "Ideal":
        return ideal_mul(self, other)

    def __pow__(self, e: int) -> "Ideal":
        if e < 0:
            raise ValueError("negative ideal power")
        result = Ideal.unit(self.K)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result


def ideal_mul(a: Ideal, b: Ideal) -> Ideal:
    K = a.K
    if a.is_one():
        return b
    if b.is_one():
        return a
    D = a.min_int * b.min_int
    g = b.gens2()
    if g is None:
        a, b = b, a
        g = b.gens2()
    if g is not None:
        m, beta = g
        vecs = [[m * c for c in r] for r in a.hnf]
        vecs += [mul_coords(K.mt, r, beta.coords) for r in a.hnf]
    else:
        vecs = [mul_coords(K.mt, r, s) for r in a.hnf for s in b.hnf]
    return Ideal.from_zgens(K, vecs, D)


def ideal_norm(a: Ideal) -> int:
    return a.norm


class PrimeIdeal:
    """A prime P above p with ramification e and residue degree fdeg."""

    __slots__ = ("ideal", "p", "e", "fdeg", "two_elt", "_tau", "_res")

    def __init__(self, ideal: Ideal, p: int, e: int, fdeg: int, beta: FieldElement):
        self.ideal = ideal
        self.p = p
        self.e = e
        self.fdeg = fdeg
        self.two_elt = (p, beta)
        self._tau = None
        self._res = None

    @property
    def K(self):
        return self.ideal.K

    @property
    def norm(self):
        return self.ideal.norm

    @property
    def hnf(self):
        return self.ideal.hnf

    def __eq__(self, other):
        if isinstance(other, PrimeIdeal):
            return self.ideal == other.ideal
        if isinstance(other, Ideal):
            return self.ideal == other
        return NotImplemented

    def __hash__(self):
        return hash(self.ideal)

    def __repr__(self):
        return f"PrimeIdeal(p={self.p}, e={self.e}, f={self.fdeg}, beta={self.two_elt[1]!r})"

    def sort_key(self):
        return (self.norm, self.p, self.ideal.hnf)

    def tau_matrix(self):
        """Multiplication matrix of an element of p*P^{-1} not in pO."""
        if self._tau is None:
            K = self.K
            beta = self.two_elt[1]
            rows = [mul_coords(K.mt, [1 if i == j else 0 for j in range(K.n)], beta.coords)
                    for i in range(K.n)]
            kern = nullspace_mod(rows, self.p)
            if not kern:
                raise ArithmeticError("no anti-uniformizer found")
            tau = FieldElement.make(K, kern[0])
            self._tau = tau.mult_matrix()
        return self._tau

    def valuation(self, x: FieldElement) -> int:
        return ideal_valuation(x, self)

    def residue(self) -> "ResidueField":
        if self._res is None:
            self._res = ResidueField(self)
        return self._res


def _coord_valuation(coords, P: PrimeIdeal) -> int:
    return p_unit_part(coords, P)[0]


def p_unit_part(coords, P: PrimeIdeal):
    """(v, z) with v = ord_P(x) and z = x*(tau/p)^v integral and prime to P."""
    M = P.tau_matrix()
    p = P.p
    n = len(coords)
    x = list(coords)
    v = 0
    while True:
        y = [0] * n
        for i, c in enumerate(x):
            if c:
                row = M[i]
                for k in range(n):
                    if row[k]:
                        y[k] += c * row[k]
        if any(c % p for c in y):
            return v, x
        x = [c // p for c in y]
        v += 1


def ideal_valuation(x, P: PrimeIdeal) -> int:
    """ord_P(x) for a nonzero element (or integral ideal)."""
    if isinstance(x, Ideal):
        return min(_coord_valuation(r, P) for r in x.hnf if any(r))
    if x.is_zero():
        raise ZeroElement("valuation of zero")
    v = _coord_valuation(x.coords, P)
    if x.den != 1:
        d, k = x.den, 0
        while d % P.p == 0:
            d //= P.p
            k += 1
        v -= k * P.e
    return v


class ResidueField:
    """O_K / P with elements represented canonically.

    For fdeg = 1 the elements are integers mod p.  Otherwise they are
    reduced coordinate tuples modulo the HNF of P.
    """

    def __init__(self, P: PrimeIdeal):
        self.P = P
        self.p = P.p
        self.q = P.norm
        self.K = P.K
        H = P.hnf
        n = self.K.n
        if P.fdeg == 1:
            col = next(j for j in range(n) if H[j][j] != 1)
            vals = []
            for i in range(n):
                e = [0] * n
                e[i] = 1
                r = self._reduce(e)
                vals.append(r[col])
            inv1 = pow(vals[0], -1, self.p)
            self.vals = [v * inv1 % self.p for v in vals]
        else:
            self.vals = None

    def _reduce(self, coords):
        H = self.P.hnf
        x = list(coords)
        for j in range(len(x) - 1, -1, -1):
            q = x[j] // H[j][j]
            if q:
                for k in range(j + 1):
                    x[k] -= q * H[j][k]
        return tuple(x)

    @property
    def one(self):
        return 1 if self.vals is not None else self._reduce([1] + [0] * (self.K.n - 1))

    def from_element(self, x: FieldElement):
        """Residue of a P-integral element (den must be prime to p)."""
        if self.vals is not None:
            p = self.p
            s = sum(c * v for c, v in zip(x.coords, self.vals)) % p
            if x.den != 1:
                s = s * pow(x.den, -1, p) % p
            return s
        if x.den == 1:
            return self._reduce(x.coords)
        dinv = pow(x.den, -1, self.p)
        return self._reduce([c * dinv for c in x.coords])

    def is_zero(self, a):
        return a == 0 if self.vals is not None else not any(a)

    def mul(self, a, b):
        if self.vals is not None:
            return a * b % self.p
        return self._reduce(mul_coords(self.K.mt, a, b))

    def pow(self, a, e):
        if self.vals is not None:
            return pow(a, e, self.p)
        e %= (self.q - 1)
        result = self.one
        while e:
            if e & 1:
                result = self.mul(result, a)
            e >>= 1
            if e:
                a = self.mul(a, a)
        return result

    def inv(self, a):
        if self.vals is not None:
            return pow(a, -1, self.p)
        return self.pow(a, self.q - 2)


# ----------------------------------------------------------- decomposition

def prime_decompose(K: NumberField, p: int):
    """All primes above p, sorted by (norm, hnf)."""
    with K._lock:
        if p in K._prime_cache:
            return K._prime_cache[p]
    if K.index % p:
        out = _kummer_dedekind(K, p)
    else:
        out = _split_algebra(K, p)
    out.sort(key=PrimeIdeal.sort_key)
    assert sum(P.e * P.fdeg for P in out) == K.n
    with K._lock:
        K._prime_cache[p] = out
    return out


def _kummer_dedekind(K, p):
    out = []
    for g, e in pmod_factor(list(K.f), p):
        beta = K.from_poly(g)
        if beta.is_zero():
            beta = K.from_int(p)
        I = Ideal.two_element(K, p, beta)
        out.append(PrimeIdeal(I, p, e, len(g) - 1, beta))
    return out


def _alg_mul(K, a, b, p):
    return [c % p for c in mul_coords(K.mt, a, b)]


def _alg_pow(K, a, e, p):
    result = [1] + [0] * (K.n - 1)
    while e:
        if e & 1:
            result = _alg_mul(K, result, a, p)
        e >>= 1
        if e:
            a = _alg_mul(K, a, a, p)
    return result


def _solve_mod(rows, target, p):
    """Coefficients c with sum c_i rows_i = target mod p, or None."""
    kern = nullspace_mod(list(rows) + [target], p)
    for v in kern:
        if v[-1] % p:
            inv = pow(-v[-1], -1, p)
            return [c * inv % p for c in v[:-1]]
    return None


def _split_algebra(K, p):
    """Decompose p when it divides the index: split O/pO by idempotents."""
    n = K.n
    basis = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    frob = [_alg_pow(K, e, p, p) for e in basis]
    q = p ** ilog_ceil(n, p)
    rad = nullspace_mod([_alg_pow(K, e, q, p) for e in basis], p)
    berl = nullspace_mod([[(a - b) % p for a, b in zip(frob[i], basis[i])] for i in range(n)], p)
    one = basis[0]
    idems = [one]
    for b in berl:
        new = []
        for eps in idems:
            be = _alg_mul(K, b, eps, p)
            # minimal polynomial of b*eps acting on eps*A (eps is the unit there)
            powers = [eps]
            while True:
                nxt = _alg_mul(K, powers[-1], be, p)
                c = _solve_mod(powers, nxt, p)
                if c is not None:
                    minpoly = [(-x) % p for x in c] + [1]
                    break
                powers.append(nxt)
            roots = [ (-g[0]) % p for g, _ in pmod_factor(minpoly, p)]
            if len(roots) == 1:
                new.append(eps)
                continue
            for r in roots:
                e_r = eps
                for s in roots:
                    if s == r:
                        continue
                    inv = pow((r - s) % p, -1, p)
                    fac = [((x - s * y) * inv) % p for x, y in zip(be, eps)]
                    e_r = _alg_mul(K, e_r, fac, p)
                new.append(e_r)
        idems = new
    out = []
    for eps in idems:
        comp = [(a - b) % p for a, b in zip(one, eps)]
        gens = list(rad) + [_alg_mul(K, comp, e, p) for e in basis]
        I = Ideal.from_zgens(K, gens, p)
        f = 0
        N = I.norm
        while N > 1:
            N //= p
            f += 1
        dim = rank_mod([_alg_mul(K, eps, e, p) for e in basis], p)
        e_idx = dim // f
        beta = _two_elt_generator(K, I, p)
        out.append(PrimeIdeal(Ideal(K, I.hnf, gens2=(p, beta)), p, e_idx, f, beta))
    return out


def _two_elt_generator(K, I, p):
    rng = random.Random(p * 1000003 + K.n)
    rows = I.hnf
    cands = [FieldElement.make(K, r) for r in rows]
    for _ in range(2000):
        if cands:
            c = cands.pop()
        else:
            coef = [rng.randrange(0, p + 1) for _ in rows]
            c = FieldElement.make(K, [sum(coef[i] * rows[i][k] for i in range(K.n))
                                      for k in range(K.n)])
        if c.is_zero():
            continue
        if Ideal.two_element(K, p, c) == I:
            return c
    raise ArithmeticError("no two-element representation found")


__all__ = ["Ideal", "PrimeIdeal", "ResidueField", "prime_decompose", "ideal_mul",
           "ideal_norm", "ideal_valuation"]
