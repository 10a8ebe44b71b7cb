"""Number fields, their elements and certified complex embeddings."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

import mpmath
from sympy import Poly, symbols

from ..errors import InputError, NotIrreducible, ZeroElement
from .intervals import hi, iv, lo, mp, precision
from .intmath import bareiss_det, factor_integer, solve_left
from .order import maximal_order, poly_discriminant, poly_mulmod

DEFAULT_PREC = 128
_x = symbols("x")


def _parse_poly(coeffs):
    """Validate coefficients (highest degree first); return them low-first."""
    coeffs = list(coeffs)
    if not coeffs:
        raise InputError("empty polynomial")
    out = []
    for c in coeffs:
        if isinstance(c, bool) or not isinstance(c, int):
            try:
                import numbers
                if isinstance(c, numbers.Integral):
                    c = int(c)
                else:
                    raise TypeError
            except TypeError:
                raise InputError(f"coefficient {c!r} is not an integer") from None
        out.append(int(c))
    while len(out) > 1 and out[0] == 0:
        out.pop(0)
    if len(out) < 2:
        raise InputError("polynomial must have degree >= 1")
    if out[0] != 1:
        raise InputError("polynomial must be monic")
    return list(reversed(out))


class NumberField:
    """K = Q[x]/(f) together with a certified integral basis.

    Build instances with :func:`build_field`.  Basis element i is
    ``sum_j basis_num[i][j] * alpha**j / basis_den``; the matrix is lower
    triangular and row 0 is the element 1.
    """

    def __init__(self, f, order, disc, cert, poly_disc, r1):
        self.f = tuple(f)
        self.n = len(f) - 1
        self.basis_num = tuple(tuple(r) for r in order.num)
        self.basis_den = order.den
        self.mt = order.mt
        self._order = order
        self.disc = disc
        self.poly_disc = poly_disc
        self.certificate = cert
        self.r1 = r1
        self.r2 = (self.n - r1) // 2
        self._lock = threading.RLock()
        self._emb_cache = {}
        self._prime_cache = {}
        self._misc = {}

    def __repr__(self):
        return f"NumberField({self.poly_string()})"

    def __reduce__(self):
        return (build_field, (tuple(reversed(self.f)),))

    def poly_string(self):
        return ",".join(str(c) for c in reversed(self.f))

    @property
    def basis(self):
        """Integral basis as rows of Fractions over the power basis."""
        return [[Fraction(c, self.basis_den) for c in r] for r in self.basis_num]

    @property
    def signature(self):
        return self.r1, self.r2

    @property
    def unit_rank(self):
        return self.r1 + self.r2 - 1

    @cached_property
    def index(self) -> int:
        """[O_K : Z[alpha]]."""
        return self.basis_den ** self.n // abs(bareiss_det(self.basis_num))

    # -- elements -------------------------------------------------------
    def element(self, coords, den=1) -> "FieldElement":
        return FieldElement.make(self, coords, den)

    def from_int(self, k) -> "FieldElement":
        return self.element([k] + [0] * (self.n - 1))

    @cached_property
    def one(self):
        return self.from_int(1)

    @cached_property
    def zero(self):
        return self.from_int(0)

    @cached_property
    def gen(self):
        return self.from_poly([0, 1] if self.n > 1 else [-self.f[0]])

    def from_poly(self, coeffs):
        """Element given by rational power-basis coefficients (low first)."""
        v = [Fraction(c) for c in coeffs]
        if len(v) > self.n:
            v = [Fraction(c) for c in poly_mulmod(v, [1], list(self.f))]
        v = v + [Fraction(0)] * (self.n - len(v))
        c = self._order.to_coords(v)
        d = lcm(*[x.denominator for x in c]) if c else 1
        return self.element([int(x * d) for x in c], d)

    def basis_vector(self, i):
        e = [0] * self.n
        e[i] = 1
        return self.element(e)

    # -- embeddings -----------------------------------------------------
    def roots(self, prec=DEFAULT_PREC):
        """Certified roots: list of (re, im) intervals, r1 real places first."""
        with self._lock:
            key = ("roots", prec)
            if key not in self._emb_cache:
                self._emb_cache[key] = _certified_roots(self.f, self.r1, prec)
            return self._emb_cache[key]

    def basis_embeddings(self, prec=DEFAULT_PREC):
        """sigma_i(w_j) as (re, im) interval pairs, indexed [place][j]."""
        with self._lock:
            key = ("basis", prec)
            if key in self._emb_cache:
                return self._emb_cache[key]
            rts = self.roots(prec)
            out = []
            with precision(prec):
                den = iv.mpf(self.basis_den)
                for k, (a, b) in enumerate(rts):
                    powers = [(iv.mpf(1), iv.mpf(0))]
                    for _ in range(self.n - 1):
                        x, y = powers[-1]
                        if k < self.r1:
                            powers.append((x * a, iv.mpf(0)))
                        else:
                            powers.append((x * a - y * b, x * b + y * a))
                    row = []
                    for num in self.basis_num:
                        re = sum((c * powers[j][0] for j, c in enumerate(num) if c), iv.mpf(0)) / den
                        im = sum((c * powers[j][1] for j, c in enumerate(num) if c), iv.mpf(0)) / den
                        row.append((re, im))
                    out.append(row)
            self._emb_cache[key] = out
            return out

    @cached_property
    def abs_disc(self):
        return abs(self.disc)

    def gram_t2(self, prec=DEFAULT_PREC):
        """Float Gram matrix of T2 on the integral basis (mp numbers)."""
        with self._lock:
            key = ("gram", prec)
            if key in self._emb_cache:
                return self._emb_cache[key]
        emb = self.basis_embeddings(prec)
        n = self.n
        with precision(prec):
            vals = [[(_m(re), _m(im)) for re, im in row] for row in emb]
            G = [[mp.mpf(0)] * n for _ in range(n)]
            for k, row in enumerate(vals):
                wgt = 1 if k < self.r1 else 2
                for i in range(n):
                    for j in range(i, n):
                        G[i][j] += wgt * (row[i][0] * row[j][0] + row[i][1] * row[j][1])
            for i in range(n):
                for j in range(i):
                    G[i][j] = G[j][i]
        with self._lock:
            self._emb_cache[("gram", prec)] = G
        return G

    def decompose(self, p):
        from .ideal import prime_decompose
        return prime_decompose(self, p)


def _m(x):
    return (lo(x) + hi(x)) / 2


def _horner(coeffs_low, z):
    acc = 0
    for c in reversed(coeffs_low):
        acc = acc * z + c
    return acc


def _certified_roots(f, r1, prec):
    """Roots of f with certified isolating disks; real places first."""
    n = len(f) - 1
    hi_coeffs = list(reversed(f))
    df = [i * f[i] for i in range(1, n + 1)]
    work = prec
    for _ in range(8):
        with precision(work + 20):
            try:
                approx = mpmath.polyroots(hi_coeffs, maxsteps=100 + 20 * n,
                                          extraprec=work + 20 * n, cleanup=True)
            except mpmath.libmp.NoConvergence:
                work *= 2
                continue
        if n == 1:
            approx = [mpmath.mpc(-f[0])]
        with precision(work):
            radii = []
            for z in approx:
                zi = iv.mpc(z.real, z.imag)
                fz = abs(_horner(f, zi))
                dfz = abs(_horner(df, zi))
                if lo(dfz) <= 0:
                    radii = None
                    break
                radii.append(hi(iv.mpf(n) * fz / dfz) if n > 1 else mp.mpf(0))
            ok = radii is not None
            if ok:
                for i in range(n):
                    for j in range(i + 1, n):
                        if abs(approx[i] - approx[j]) * (1 - mp.mpf(2) ** (-work // 2)) <= radii[i] + radii[j]:
                            ok = False
            real, cplx = [], []
            if ok:
                for i, z in enumerate(approx):
                    rho = radii[i]
                    if abs(z.imag) > rho:
                        if z.imag > 0:
                            cplx.append((z, rho))
                        continue
                    # conj(D_i) must meet no other disk, then the root in D_i is real
                    zc = mpmath.conj(z)
                    for j, w in enumerate(approx):
                        if j != i and abs(zc - w) * (1 - mp.mpf(2) ** (-work // 2)) <= rho + radii[j]:
                            ok = False
                    real.append((z.real, rho))
            if ok and len(real) == r1 and len(cplx) * 2 + r1 == n:
                real.sort(key=lambda t: t[0])
                cplx.sort(key=lambda t: (t[0].real, t[0].imag))
                out = []
                for c, rho in real:
                    out.append((iv.mpf([c - rho, c + rho]), iv.mpf(0)))
                for z, rho in cplx:
                    out.append((iv.mpf([z.real - rho, z.real + rho]),
                                iv.mpf([z.imag - rho, z.imag + rho])))
                if work != prec:
                    with precision(prec):
                        out = [(+a, +b) for a, b in out]
                return out
        work *= 2
    raise ArithmeticError("could not certify the roots of f")


def build_field(coeffs, factored_disc=None) -> NumberField:
    """Build K = Q[x]/(f) for f given by integer coefficients, highest degree first.

    ``factored_disc`` may supply a known factorisation of disc(f) (a dict
    prime -> exponent); it is checked by multiplying it out.
    """
    f = _parse_poly(coeffs)
    n = len(f) - 1
    P = Poly(list(reversed(f)), _x)
    if n > 1 and not P.is_irreducible:
        raise NotIrreducible("polynomial is reducible over Q")
    r1 = int(P.count_roots()) if n > 1 else 1
    pd = poly_discriminant(f)
    if factored_disc is not None:
        prod = 1
        for p, e in factored_disc.items():
            prod *= p ** e
        if prod != abs(pd):
            raise InputError("supplied factorisation does not match disc(f)")
    else:
        factored_disc = factor_integer(pd)
    order, disc, cert = maximal_order(f, pd, factored_disc)
    K = NumberField(f, order, disc, cert, pd, r1)
    if (disc < 0) != (K.r2 % 2 == 1):
        raise ArithmeticError("discriminant sign does not match signature")
    return K


# ------------------------------------------------------------------ elements

@dataclass(frozen=True, slots=True, eq=False)
class FieldElement:
    """x = (sum coords[i] * w_i) / den with coprime content."""

    K: NumberField
    coords: tuple
    den: int = 1

    @staticmethod
    def make(K, coords, den=1):
        coords = [int(c) for c in coords]
        if len(coords) != K.n:
            raise InputError("wrong number of coordinates")
        if den == 0:
            raise ZeroDivisionError
        if den < 0:
            coords = [-c for c in coords]
            den = -den
        g = gcd(den, *coords) if den != 1 else 1
        if g > 1:
            coords = [c // g for c in coords]
            den //= g
        return FieldElement(K, tuple(coords), den)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.K.from_int(other)
        return (isinstance(other, FieldElement) and self.K is other.K
                and self.coords == other.coords and self.den == other.den)

    def __hash__(self):
        return hash((self.coords, self.den))

    def __repr__(self):
        s = "[" + ", ".join(map(str, self.coords)) + "]"
        return s if self.den == 1 else f"{s}/{self.den}"

    def is_zero(self):
        return not any(self.coords)

    def is_integral(self):
        return self.den == 1

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, int):
            return self.K.from_int(other)
        if isinstance(other, Fraction):
            return self.K.element([other.numerator] + [0] * (self.K.n - 1), other.denominator)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = lcm(self.den, other.den)
        a, b = d // self.den, d // other.den
        return FieldElement.make(self.K, [a * x + b * y for x, y in zip(self.coords, other.coords)], d)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.K, tuple(-c for c in self.coords), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement.make(self.K, mul_coords(self.K.mt, self.coords, other.coords),
                                 self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.K.one
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def mult_matrix(self):
        """Integer matrix whose row i is (den*x)*w_i in coordinates."""
        mt = self.K.mt
        n = self.K.n
        rows = []
        for i in range(n):
            row = [0] * n
            mi = mt[i]
            for j, c in enumerate(self.coords):
                if c:
                    for k, v in enumerate(mi[j]):
                        if v:
                            row[k] += c * v
            rows.append(row)
        return rows

    def norm(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return Fraction(bareiss_det(self.mult_matrix()), self.den ** self.K.n)

    def trace(self) -> Fraction:
        M = self.mult_matrix()
        return Fraction(sum(M[i][i] for i in range(self.K.n)), self.den)

    def inverse(self):
        if self.is_zero():
            raise ZeroElement("inverse of zero")
        y = solve_left(self.mult_matrix(), [1] + [0] * (self.K.n - 1))
        d = lcm(*[c.denominator for c in y])
        return FieldElement.make(self.K, [int(c * d) * self.den for c in y], d)

    def to_poly(self):
        """Power-basis coefficients (Fractions, low first)."""
        K = self.K
        out = [Fraction(0)] * K.n
        for c, row in zip(self.coords, K.basis_num):
            if c:
                for j, b in enumerate(row):
                    out[j] += c * b
        return [Fraction(v, K.basis_den * self.den) for v in out]

    def embeddings(self, prec=DEFAULT_PREC):
        """(re, im) intervals of sigma_k(x) for every place k."""
        emb = self.K.basis_embeddings(prec)
        with precision(prec):
            d = iv.mpf(self.den)
            out = []
            for row in emb:
                re = iv.mpf(0)
                im = iv.mpf(0)
                for c, (a, b) in zip(self.coords, row):
                    if c:
                        re += c * a
                        im += c * b
                out.append((re / d, im / d))
        return out

    def t2(self, prec=DEFAULT_PREC):
        """T2(x) = sum over all n embeddings of |sigma(x)|^2, as an interval."""
        r1 = self.K.r1
        with precision(prec):
            tot = iv.mpf(0)
            for k, (a, b) in enumerate(self.embeddings(prec)):
                v = a * a + b * b
                tot += v if k < r1 else 2 * v
        return tot

    def log_abs(self, prec=DEFAULT_PREC):
        """log|sigma_k(x)| per place, as intervals (unweighted); cached per field."""
        if self.is_zero():
            raise ZeroElement("log of zero")
        cache = self.K._emb_cache
        key = ("log", self.coords, self.den, prec)
        hit = cache.get(key)
        if hit is None:
            hit = self._log_abs(prec)
            with self.K._lock:
                if len(cache) > 200000:
                    for k in [k for k in cache if k[0] == "log"]:
                        del cache[k]
                cache[key] = hit
        return list(hit)

    def _log_abs(self, prec):
        p = prec
        for _ in range(10):
            out = []
            ok = True
            with precision(p):
                for a, b in self.embeddings(p):
                    m = a * a + b * b
                    # cancellation can leave a positive but very wide interval
                    if lo(m) <= 0 or hi(m) > lo(m) * (1 + mpmath.mpf(2) ** (-(prec // 2))):
                        ok = False
                        break
                    out.append(iv.log(m) / 2)
            if ok:
                if p != prec:
                    with precision(prec):
                        out = [+v for v in out]
                return out
            p *= 2
        raise ArithmeticError("embedding too close to zero")


def mul_coords(mt, a, b):
    n = len(a)
    out = [0] * n
    for i, x in enumerate(a):
        if x:
            row = mt[i]
            for j, y in enumerate(b):
                if y:
                    xy = x * y
                    for k, c in enumerate(row[j]):
                        if c:
                            out[k] += xy * c
    return out


def element_mul(a, b):
    return a * b


def element_norm(a):
    return a.norm()


def t2_norm(a, prec=DEFAULT_PREC):
    """T2 norm of an integral element as an interval."""
    return a.t2(prec)


__all__ = ["NumberField", "FieldElement", "build_field", "element_mul",
           "element_norm", "t2_norm", "DEFAULT_PREC", "mul_coords"]
