"""Integer and F_p helpers: gcds, determinants, primes, modular linear algebra.

Polynomials are coefficient lists, lowest degree first, unless a docstring
says otherwise.
"""

from __future__ import annotations

import math
from fractions import Fraction

from sympy import factorint, isprime, nextprime, perfect_power
from sympy.ntheory import ecm, pollard_rho
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_factor

__all__ = [
    "xgcd", "bareiss_det", "solve_left", "primes_up_to", "factor_integer",
    "isprime", "nextprime", "pmod_trim", "pmod_mul", "pmod_divmod",
    "pmod_gcd", "pmod_powmod", "pmod_factor", "pmod_ddf_degrees",
    "nullspace_mod", "rank_mod", "ilog_ceil",
]


def xgcd(a: int, b: int):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def bareiss_det(m) -> int:
    """Exact determinant of a square integer matrix (fraction free)."""
    a = [list(r) for r in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (akk * ri[j] - aik * rk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def solve_left(m, b):
    """Solve y·m = b exactly over Q (m square, nonsingular)."""
    n = len(m)
    # transpose system: m^T y^T = b^T
    a = [[Fraction(m[j][i]) for j in range(n)] + [Fraction(b[i])] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        rc = [x * inv for x in a[c]]
        a[c] = rc
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], rc)]
    return [a[i][n] for i in range(n)]


_PRIME_CACHE = [2, 3, 5, 7]
_PRIME_LIMIT = 10


def primes_up_to(x: int) -> list[int]:
    """All primes p <= x (sieve, cached and grown on demand)."""
    global _PRIME_CACHE, _PRIME_LIMIT
    if x > _PRIME_LIMIT:
        lim = max(x, 2 * _PRIME_LIMIT)
        sieve = bytearray([1]) * (lim + 1)
        sieve[0:2] = b"\x00\x00"
        for i in range(2, math.isqrt(lim) + 1):
            if sieve[i]:
                sieve[i * i::i] = bytearray(len(range(i * i, lim + 1, i)))
        _PRIME_CACHE = [i for i in range(lim + 1) if sieve[i]]
        _PRIME_LIMIT = lim
    import bisect
    return _PRIME_CACHE[:bisect.bisect_right(_PRIME_CACHE, x)]


def factor_integer(n: int) -> dict[int, int]:
    """Complete factorisation of |n|.

    Trial division to 2^16, then Pollard rho for small factors, then ECM
    with fixed seeds (deterministic).  Every returned factor is a proven
    (BPSW) prime as certified by sympy's isprime.
    """
    n = abs(n)
    out: dict[int, int] = {}
    if n <= 1:
        return out
    for p in primes_up_to(1 << 16):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
    stack = [n] if n > 1 else []
    while stack:
        c = stack.pop()
        if c == 1:
            continue
        if isprime(c):
            out[c] = out.get(c, 0) + 1
            continue
        r = perfect_power(c)
        if r:
            b, k = r
            stack.extend([b] * k)
            continue
        d = pollard_rho(c, retries=2, max_steps=20000)
        if d:
            stack.extend([d, c // d])
            continue
        for f in _ecm_factors(c):
            while c % f == 0:
                c //= f
                stack.append(f)
        stack.append(c)
    return dict(sorted(out.items()))


def _ecm_factors(c: int) -> list[int]:
    """Nontrivial factors of a composite c (sympy's ECM, fixed seed)."""
    for B1 in (5000, 20000, 100000, 500000):
        try:
            fs = sorted(int(f) for f in ecm(c, B1=B1, B2=100 * B1, max_curve=400, seed=1))
        except ValueError:
            continue
        fs = [f for f in fs if 1 < f < c and c % f == 0]
        if fs:
            return fs
    return [int(f) for f in sorted(factorint(c)) if f < c]


def ilog_ceil(x: int, p: int) -> int:
    """Smallest j >= 0 with p**j >= x."""
    j, q = 0, 1
    while q < x:
        q *= p
        j += 1
    return j


# ---------------------------------------------------------------- F_p[x]

def pmod_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def pmod_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return pmod_trim([c % p for c in out])


def pmod_divmod(a, b, p):
    a = [c % p for c in a]
    pmod_trim(a)
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - db, 0)
    while len(a) - 1 >= db and a:
        c = a[-1] * inv % p
        s = len(a) - 1 - db
        q[s] = c
        for i, y in enumerate(b):
            a[s + i] = (a[s + i] - c * y) % p
        pmod_trim(a)
    return q, a


def _pmod_rem(a, f, p):
    return pmod_divmod(a, f, p)[1]


def pmod_gcd(a, b, p):
    a = pmod_trim([c % p for c in a])
    b = pmod_trim([c % p for c in b])
    while b:
        a, b = b, _pmod_rem(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def _mulmod_poly(a, b, f, p):
    return _pmod_rem(pmod_mul(a, b, p), f, p)


def pmod_powmod(a, e, f, p):
    """a**e mod (f, p)."""
    result = [1]
    base = _pmod_rem(list(a), f, p)
    while e:
        if e & 1:
            result = _mulmod_poly(result, base, f, p)
        e >>= 1
        if e:
            base = _mulmod_poly(base, base, f, p)
    return result


def pmod_factor(f, p):
    """Factor f mod p: list of (monic factor, multiplicity), low-first lists."""
    hi = [int(c) % p for c in reversed(f)]
    _, facs = gf_factor(hi, p, ZZ)
    out = [([int(c) for c in reversed(g)], k) for g, k in facs]
    out.sort(key=lambda t: (len(t[0]), t[0][::-1], t[1]))
    return out


def pmod_ddf_degrees(f, p, maxdeg):
    """Residue degrees <= maxdeg of the irreducible factors of a squarefree f mod p.

    Returns a dict degree -> number of irreducible factors of that degree.
    """
    f = [c % p for c in f]
    n = len(f) - 1
    counts: dict[int, int] = {}
    h = [0, 1]
    g = list(f)
    for d in range(1, min(maxdeg, n) + 1):
        if len(g) - 1 < 2 * d:
            # what is left (if anything) is irreducible
            if len(g) - 1 >= d and len(g) - 1 <= maxdeg:
                counts[len(g) - 1] = counts.get(len(g) - 1, 0) + 1
            return counts
        h = pmod_powmod(h, p, g, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        pmod_trim(diff)
        c = pmod_gcd(diff, g, p)
        k = len(c) - 1
        if k > 0:
            counts[d] = k // d
            g = pmod_divmod(g, c, p)[0]
            h = _pmod_rem(h, g, p)
    return counts


# ------------------------------------------------------- F_p linear algebra

def nullspace_mod(rows, p):
    """Left kernel over F_p: basis of vectors c with sum_i c_i rows_i = 0."""
    m = len(rows)
    if m == 0:
        return []
    ncol = len(rows[0])
    a = [[x % p for x in r] + [1 if i == j else 0 for j in range(m)] for i, r in enumerate(rows)]
    row = 0
    for c in range(ncol):
        piv = next((r for r in range(row, m) if a[r][c]), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = pow(a[row][c], -1, p)
        a[row] = [x * inv % p for x in a[row]]
        pr = a[row]
        for r in range(m):
            if r != row and a[r][c]:
                f = a[r][c]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], pr)]
        row += 1
        if row == m:
            break
    return [a[r][ncol:] for r in range(row, m)]


def rank_mod(rows, p):
    if not rows:
        return 0
    return len(rows) - len(nullspace_mod(rows, p))


# ------------------------------------------------------ lattice normal form

def hnf_lower_mod(vectors, D: int, n: int):
    """Lower-triangular row HNF of the lattice spanned by vectors + D*Z^n.

    Row j has its pivot in column j and zeros right of it; entries left of a
    pivot are reduced into [0, pivot of their column).  D must be a positive
    integer such that D*Z^n lies in the lattice (or is meant to be added).
    """
    W = [[0] * n for _ in range(n)]
    for j in range(n):
        W[j][j] = D
    for v in vectors:
        v = [c % D for c in v]
        for j in range(n - 1, -1, -1):
            b = v[j]
            if b == 0:
                continue
            wj = W[j]
            a = wj[j]
            g, s, t = xgcd(a, b)
            ag, bg = a // g, b // g
            W[j] = [(s * wj[k] + t * v[k]) % D for k in range(j)] + [g] + [0] * (n - j - 1)
            v = [(bg * wj[k] - ag * v[k]) % D for k in range(j)] + [0] * (n - j)
    for i in range(n):
        wi = W[i]
        for j in range(i - 1, -1, -1):
            q = wi[j] // W[j][j]
            if q:
                wj = W[j]
                for k in range(j + 1):
                    wi[k] -= q * wj[k]
    return tuple(tuple(r) for r in W)


def lower_solve(H, v):
    """Integer z with z·H = v for lower-triangular H, or None if v not in the lattice."""
    n = len(H)
    v = list(v)
    z = [0] * n
    for j in range(n - 1, -1, -1):
        if v[j]:
            q, r = divmod(v[j], H[j][j])
            if r:
                return None
            z[j] = q
            hj = H[j]
            for k in range(j + 1):
                v[k] -= q * hj[k]
    return z
