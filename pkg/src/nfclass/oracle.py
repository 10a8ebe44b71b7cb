"""Brute-force ground truth, kept independent of the pipeline.

Nothing here uses the pipeline's ideal, lattice, relation or linear algebra
code; only the field's defining polynomial and integral basis are read.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import CapExceeded, NotFundamental

# --------------------------------------------------------------- discriminants


def _squarefree(m: int) -> bool:
    m = abs(m)
    if m == 0:
        return False
    k = 2
    while k * k <= m:
        if m % (k * k) == 0:
            return False
        k += 1 if k == 2 else 2
    return True


def is_fundamental(d: int) -> bool:
    if d in (0, 1):
        return False
    if d % 4 == 1:
        return _squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def squarefree_kernel(d: int) -> int:
    """Squarefree part of d, same sign."""
    s = -1 if d < 0 else 1
    m = abs(d)
    out = 1
    k = 2
    while k * k <= m:
        while m % (k * k) == 0:
            m //= k * k
        if m % k == 0:
            out *= k
            m //= k
        k += 1
    return s * out * m


def field_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt d) for a nonsquare d."""
    d0 = squarefree_kernel(d)
    return d0 if d0 % 4 == 1 else 4 * d0


# ------------------------------------------------------------- forms, d < 0

def reduced_forms(d: int):
    """Reduced positive definite forms (a, b, c) of discriminant d < 0."""
    out = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and a == c:
                continue
            out.append((a, b, c))
        a += 1
    return out


def forms_class_number(d: int) -> int:
    """h(d) for a negative fundamental discriminant, by counting reduced forms."""
    if d >= 0 or not is_fundamental(d):
        raise NotFundamental(f"{d} is not a negative fundamental discriminant")
    return len(reduced_forms(d))


# ------------------------------------------------------------- forms, D > 0

def indefinite_class_number(D: int) -> int:
    """Wide class number of the real quadratic field of fundamental discriminant D.

    Counts cycles of reduced indefinite forms (narrow class number) and
    halves it when the fundamental unit has norm +1.
    """
    if D <= 0 or not is_fundamental(D):
        raise NotFundamental(f"{D} is not a positive fundamental discriminant")
    s = math.isqrt(D)

    def reduced(a, b):
        A = abs(a)
        if not (0 < b and b * b < D):
            return False
        if (2 * A + b) ** 2 <= D:
            return False
        t = 2 * A - b
        return t <= 0 or t * t < D

    forms = []
    for b in range(1, s + 1):
        if (b - D) % 2:
            continue
        ac = (b * b - D) // 4
        for A in range(1, -ac + 1):
            if ac % A:
                continue
            for a in (A, -A):
                if reduced(a, b):
                    forms.append((a, b, ac // a))
    seen = set()
    cycles = 0
    for f in forms:
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            a, b, c = g
            m = 2 * abs(c)
            t = s - ((s + b) % m)
            g = (c, t, (t * t - D) // (4 * c))
    u = cf_fundamental_unit(D)
    return cycles if u.norm == -1 else cycles // 2


# ----------------------------------------------------- continued fractions

@dataclass(frozen=True)
class QuadUnit:
    """Fundamental unit (x + y sqrt(d0)) / denom of Q(sqrt d0)."""

    d0: int
    x: int
    y: int
    denom: int
    norm: int

    def regulator(self, prec=256):
        with mpmath.workprec(prec):
            return mpmath.log((self.x + self.y * mpmath.sqrt(self.d0)) / self.denom)


def cf_fundamental_unit(d: int) -> QuadUnit:
    """Fundamental unit of the maximal order of Q(sqrt d), d > 1 nonsquare.

    Expands sqrt(d0) (or (1 + sqrt d0)/2 when d0 = 1 mod 4) and returns the
    first convergent p/q for which p - q*conj(omega) has norm +-1.
    """
    if d <= 1 or math.isqrt(d) ** 2 == d:
        raise ValueError("d must be a nonsquare > 1")
    d0 = squarefree_kernel(d)
    half = d0 % 4 == 1
    P, Q = (1, 2) if half else (0, 1)
    s = math.isqrt(d0)
    p0, p1 = 1, 0
    q0, q1 = 0, 1
    for _ in range(10 ** 7):
        a = (P + s) // Q
        p0, p1 = a * p0 + p1, p0
        q0, q1 = a * q0 + q1, q0
        p, q = p0, q0
        if half:
            x, y = 2 * p - q, q
            N = (x * x - d0 * y * y) // 4
            if abs(N) == 1:
                if x % 2 == 0 and y % 2 == 0:
                    return QuadUnit(d0, x // 2, y // 2, 1, N)
                return QuadUnit(d0, x, y, 2, N)
        else:
            N = p * p - d0 * q * q
            if abs(N) == 1:
                return QuadUnit(d0, p, q, 1, N)
        P = a * Q - P
        Q = (d0 - P * P) // Q
    raise ArithmeticError("continued fraction did not terminate")


def quadratic_log_residue(K, prec=128):
    """log res_{s=1} zeta_K for K = Q or quadratic, from the oracles above."""
    with mpmath.workprec(prec):
        if K.n == 1:
            return mpmath.mpf(0)
        if K.n != 2:
            raise ValueError("quadratic fields only")
        d = K.disc
        if d < 0:
            h = forms_class_number(d)
            w = {-4: 4, -3: 6}.get(d, 2)
            return mpmath.log(2 * mpmath.pi * h / (w * mpmath.sqrt(-d)))
        h = indefinite_class_number(d)
        R = cf_fundamental_unit(d).regulator(prec + 64)
        return mpmath.log(2 * h * R / mpmath.sqrt(d))


# --------------------------------------------------------- tiny class groups

class _Arith:
    """Own multiplication and norms on integral-basis coordinates."""

    def __init__(self, K):
        self.n = n = K.n
        f = list(K.f)
        B = [[Fraction(c) for c in row] for row in K.basis]
        self.B = B

        def polmul(a, b):
            out = [Fraction(0)] * (2 * n)
            for i, x in enumerate(a):
                for j, y in enumerate(b):
                    out[i + j] += x * y
            for k in range(2 * n - 1, n - 1, -1):
                c = out[k]
                if c:
                    for i in range(n):
                        out[k - n + i] -= c * f[i]
                    out[k] = 0
            return out[:n]

        # solve coordinates in B: v = c . B
        Binv = _inverse(B)
        self.Binv = Binv
        self.mt = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                v = polmul(B[i], B[j])
                c = [sum(v[k] * Binv[k][l] for k in range(n)) for l in range(n)]
                assert all(x.denominator == 1 for x in c)
                self.mt[i][j] = [int(x) for x in c]
        with mpmath.workprec(200):
            roots = mpmath.polyroots(list(reversed(f)), maxsteps=200, extraprec=400)
            self.roots = roots
            self.emb = [[sum(B[j][k] * r ** k for k in range(n)) for j in range(n)] for r in roots]

    def mul(self, a, b):
        n = self.n
        out = [0] * n
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        for k, c in enumerate(self.mt[i][j]):
                            out[k] += x * y * c
        return out

    def norm(self, a):
        rows = []
        for i in range(self.n):
            e = [0] * self.n
            e[i] = 1
            rows.append([Fraction(v) for v in self.mul(a, e)])
        return _det(rows)


def _inverse(M):
    n = len(M)
    A = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [r[n:] for r in A]


def _det(M):
    A = [list(r) for r in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return det


def _echelon(vectors, n):
    """Integer row echelon basis (Euclid on columns); rows span the same lattice."""
    rows = [list(v) for v in vectors if any(v)]
    out = []
    for col in range(n):
        piv = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(piv) > 1:
            piv.sort(key=lambda r: abs(r[col]))
            a = piv[0]
            new = [a]
            for r in piv[1:]:
                q = r[col] // a[col]
                r = [x - q * y for x, y in zip(r, a)]
                (new if r[col] != 0 else rest).append(r) if any(r) else None
            piv = new
        if piv:
            r = piv[0]
            if r[col] < 0:
                r = [-x for x in r]
            out.append(r)
        rows = [r for r in rest if any(r)]
    return out


class _Lat:
    """Full-rank sublattice of Z^n in canonical upper echelon form."""

    def __init__(self, vectors, n):
        E = _echelon(vectors, n)
        # reduce entries above pivots for a canonical form
        for i in range(len(E)):
            for k in range(i):
                q = E[k][i] // E[i][i]
                if q:
                    E[k] = [x - q * y for x, y in zip(E[k], E[i])]
        self.rows = tuple(tuple(r) for r in E)
        self.n = n
        self.norm = math.prod(E[i][i] for i in range(len(E))) if len(E) == n else 0

    def contains(self, v):
        v = list(v)
        for i, r in enumerate(self.rows):
            if v[i] % r[i]:
                return False
            q = v[i] // r[i]
            v = [x - q * y for x, y in zip(v, r)]
        return not any(v)

    def __eq__(self, o):
        return self.rows == o.rows

    def __hash__(self):
        return hash(self.rows)


def _minkowski_upper(K):
    n, r2 = K.n, K.r2
    with mpmath.workprec(200):
        v = (mpmath.factorial(n) / mpmath.mpf(n) ** n * (4 / mpmath.pi) ** r2
             * mpmath.sqrt(abs(K.disc)))
        return int(mpmath.floor(v * (1 + mpmath.mpf(10) ** -30)))


def _enumerate_ideals(ar, bound, out):
    n = ar.n
    unit = [[int(i == j) for j in range(n)] for i in range(n)]

    def rec(i, rows, N):
        # rows holds rows i+1..n-1 (pivots known); choose row i
        if i < 0:
            L = _Lat(rows, n)
            if all(L.contains(ar.mul(r, e)) for r in L.rows for e in unit):
                out.append(L)
            return
        for d in range(1, bound // N + 1):
            pivs = [r[j] for j, r in zip(range(i + 1, n), rows)]
            for tail in itertools.product(*[range(p) for p in pivs]):
                row = [0] * i + [d] + list(tail)
                rec(i - 1, [row] + rows, N * d)

    rec(n - 1, [], 1)


def _reduce_basis(vecs):
    """Greedy pairwise size reduction of real vectors; returns integer transform."""
    m = len(vecs)
    T = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [list(v) for v in vecs]
    changed = True
    it = 0
    while changed and it < 200:
        changed = False
        it += 1
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                den = sum(x * x for x in V[j])
                q = int(mpmath.nint(sum(x * y for x, y in zip(V[i], V[j])) / den))
                if q:
                    newv = [x - q * y for x, y in zip(V[i], V[j])]
                    if sum(x * x for x in newv) < sum(x * x for x in V[i]) * (1 - mpmath.mpf(10) ** -20):
                        V[i] = newv
                        T[i] = [x - q * y for x, y in zip(T[i], T[j])]
                        changed = True
    return T, V


class _Principality:
    def __init__(self, K, ar: _Arith):
        self.K = K
        self.ar = ar
        self.n = K.n
        self.r1, self.r2 = K.r1, K.r2
        self.rank = self.r1 + self.r2 - 1
        self.places = self._places()
        self.unit_logs = self._find_units() if self.rank > 0 else []

    def _places(self):
        # real roots and one of each complex pair, as indices into ar.roots
        out = []
        for i, r in enumerate(self.ar.roots):
            if abs(mpmath.im(r)) < mpmath.mpf(10) ** -30:
                out.append((i, True))
        for i, r in enumerate(self.ar.roots):
            if mpmath.im(r) > mpmath.mpf(10) ** -30:
                out.append((i, False))
        return out

    def real_coords(self, c):
        """Real vector of embeddings of coordinates c (complex places give Re, Im)."""
        out = []
        for i, real in self.places:
            z = sum(x * self.ar.emb[i][j] for j, x in enumerate(c))
            if real:
                out.append(mpmath.re(z))
            else:
                out.append(mpmath.re(z))
                out.append(mpmath.im(z))
        return out

    def log_vec(self, c):
        out = []
        for i, _ in self.places:
            z = sum(x * self.ar.emb[i][j] for j, x in enumerate(c))
            out.append(mpmath.log(abs(z)))
        return out

    def _find_units(self):
        n = self.n
        if n == 2:
            u = self._quadratic_unit()
            if u is not None:
                return [self._full(self.log_vec(u)[:1])]
        found = []
        for R in range(1, 60):
            for c in itertools.product(range(-R, R + 1), repeat=n):
                if max(abs(x) for x in c) != R:
                    continue
                if abs(self.ar.norm(list(c))) != 1:
                    continue
                v = self.log_vec(c)
                if max(abs(x) for x in v) < mpmath.mpf(10) ** -20:
                    continue
                cand = found + [v[:self.rank]]
                M = mpmath.matrix(cand)
                if len(cand) <= self.rank and _rank(M) == len(cand):
                    found.append(v[:self.rank])
                    if len(found) == self.rank:
                        # full log vectors
                        return [self._full(u) for u in found]
        raise CapExceeded("no independent units found in the search box")

    def _quadratic_unit(self):
        # continued-fraction unit, written in the integral basis and checked exactly
        q = cf_fundamental_unit(squarefree_kernel(self.K.disc))
        with mpmath.workprec(200):
            M = mpmath.matrix([[self.ar.emb[i][j] for j in range(2)] for i in range(2)])
            a = mpmath.mpf(q.x) / q.denom
            b = mpmath.mpf(q.y) / q.denom * mpmath.sqrt(q.d0)
            for sign in (1, -1):
                c = mpmath.lu_solve(M, mpmath.matrix([a + sign * b, a - sign * b]))
                ci = [int(mpmath.nint(mpmath.re(c[k]))) for k in range(2)]
                if abs(self.ar.norm(ci)) == 1 and self.log_vec(ci)[0] != 0:
                    return ci
        return None

    def _full(self, short):
        # last coordinate from the norm relation sum d_i v_i = 0
        w = [1 if real else 2 for _, real in self.places]
        last = -sum(wi * x for wi, x in zip(w, short)) / w[-1]
        return list(short) + [last]

    def is_principal(self, L: _Lat):
        N = L.norm
        n = self.n
        with mpmath.workprec(200):
            # per-place bounds on |sigma(x)|
            base = mpmath.mpf(N) ** (mpmath.mpf(1) / n)
            bounds = []
            for k in range(len(self.places)):
                s = sum(abs(u[k]) for u in self.unit_logs) / 2
                bounds.append(base * mpmath.exp(s) * (1 + mpmath.mpf(10) ** -12))
            vecs = [self.real_coords(r) for r in L.rows]
            T, V = _reduce_basis(vecs)
            M = mpmath.matrix(V).T
            Minv = M ** -1
            limits = []
            rb = []
            for (_, real), b in zip(self.places, bounds):
                rb.append(b)
                if not real:
                    rb.append(b)
            for j in range(n):
                limits.append(int(mpmath.floor(sum(abs(Minv[j, k]) * rb[k] for k in range(n)))) + 1)
            basis = [[sum(T[i][k] * L.rows[k][l] for k in range(n)) for l in range(n)] for i in range(n)]
            for c in itertools.product(*[range(-m, m + 1) for m in limits]):
                if not any(c):
                    continue
                x = [sum(c[i] * basis[i][l] for i in range(n)) for l in range(n)]
                if abs(self.ar.norm(x)) == N:
                    return True
        return False


def _rank(M):
    rows = [[M[i, j] for j in range(M.cols)] for i in range(M.rows)]
    r = 0
    cols = M.cols
    for c in range(cols):
        piv = None
        for i in range(r, len(rows)):
            if abs(rows[i][c]) > mpmath.mpf(10) ** -15:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(len(rows)):
            if i != r:
                f = rows[i][c] / rows[r][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


@dataclass
class TinyClassGroup:
    invariants: list
    order: int
    reps: list


def tiny_class_group(K, bound=None, cap=50, order_only=False) -> TinyClassGroup:
    """Class group of a small field by exhaustive ideal and element enumeration."""
    mk = _minkowski_upper(K)
    if mk > cap:
        raise CapExceeded(f"Minkowski bound {mk} exceeds cap {cap}")
    if bound is None:
        bound = mk
    ar = _Arith(K)
    pr = _Principality(K, ar)
    n = K.n
    ideals = []
    _enumerate_ideals(ar, max(bound, 1), ideals)
    ideals.sort(key=lambda L: (L.norm, L.rows))

    def conj_inverse(L):
        # N(L) L^{-1} = {y in O : y L in N(L) O}
        N = L.norm
        vecs = [[N * int(i == j) for j in range(n)] for i in range(n)]
        for y in itertools.product(range(N), repeat=n):
            if all(all(v % N == 0 for v in ar.mul(list(y), list(r))) for r in L.rows):
                vecs.append(list(y))
        return _Lat(vecs, n)

    def product(A, B):
        return _Lat([ar.mul(list(a), list(b)) for a in A.rows for b in B.rows], n)

    reps = []
    hats = []
    for L in ideals:
        for R, Rh in zip(reps, hats):
            if pr.is_principal(product(L, Rh)):
                break
        else:
            reps.append(L)
            hats.append(conj_inverse(L))
    h = len(reps)
    if order_only or h == 1:
        return TinyClassGroup([] if h == 1 else [h], h, reps)

    def which(A):
        for i, Rh in enumerate(hats):
            if pr.is_principal(product(A, Rh)):
                return i
        raise ArithmeticError("class not found")

    if _is_squarefree_int(h):
        return TinyClassGroup([h], h, reps)
    orders = []
    for R in reps:
        k, A = 1, R
        while not pr.is_principal(A):
            A = reps[which(product(A, R))]
            k += 1
        orders.append(k)
    return TinyClassGroup(_invariants_from_orders(orders), h, reps)


def _is_squarefree_int(h):
    return _squarefree(h)


def _invariants_from_orders(orders):
    """Invariant factors of a finite abelian group from its element orders."""
    h = len(orders)
    primes = sorted({p for o in orders for p in _prime_factors(o)})
    parts = []
    for p in primes:
        # |G[p^k]| for k = 1, 2, ...
        sizes = []
        k = 1
        while True:
            cnt = sum(1 for o in orders if (p ** k) % o == 0)
            sizes.append(cnt)
            if len(sizes) >= 2 and sizes[-1] == sizes[-2]:
                break
            k += 1
        # number of cyclic factors of order >= p^k is log_p(|G[p^k]| / |G[p^{k-1}]|)
        prev = 1
        ranks = []
        for s in sizes:
            ranks.append(round(math.log(s // prev, p)) if s > prev else 0)
            prev = s
        exps = []
        for k, rk in enumerate(ranks, start=1):
            nxt = ranks[k] if k < len(ranks) else 0
            exps += [k] * (rk - nxt)
        parts.append((p, sorted(exps, reverse=True)))
    width = max((len(e) for _, e in parts), default=0)
    inv = [1] * width
    for p, exps in parts:
        for i, e in enumerate(exps):
            inv[i] *= p ** e
    return sorted(x for x in inv if x > 1)


def _prime_factors(m):
    out = []
    k = 2
    while k * k <= m:
        if m % k == 0:
            out.append(k)
            while m % k == 0:
                m //= k
        k += 1
    if m > 1:
        out.append(m)
    return out


__all__ = ["forms_class_number", "indefinite_class_number", "cf_fundamental_unit",
           "QuadUnit", "tiny_class_group", "TinyClassGroup", "is_fundamental",
           "squarefree_kernel", "field_discriminant", "quadratic_log_residue",
           "reduced_forms"]
