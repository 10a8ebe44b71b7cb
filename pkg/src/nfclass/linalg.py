"""Exact integer linear algebra for relation matrices.

Row-style Hermite and Smith normal forms with unimodular transforms, the
tentative class group Z^m / (relation lattice), and discrete logarithms of
ideals over the factor base.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .core_arith.ideal import Ideal, ideal_valuation
from .core_arith.intmath import xgcd
from .core_arith.lattice import lll_gram, short_vectors
from .errors import BudgetExhausted, InconsistentPresentation


def _identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _row_combine(A, i, j, s, t, u, v):
    """(row_i, row_j) <- (s row_i + t row_j, u row_i + v row_j)."""
    ri, rj = A[i], A[j]
    A[i] = [s * a + t * b for a, b in zip(ri, rj)]
    A[j] = [u * a + v * b for a, b in zip(ri, rj)]


def _col_combine(A, i, j, s, t, u, v):
    """(col_i, col_j) <- (s col_i + t col_j, u col_i + v col_j)."""
    for r in A:
        a, b = r[i], r[j]
        r[i] = s * a + t * b
        r[j] = u * a + v * b


# ------------------------------------------------------------------ HNF

def hnf(M):
    """Row Hermite normal form: returns (H, U) with U M = H, U unimodular.

    H is upper echelon; pivots are positive, entries above a pivot lie in
    [0, pivot), and zero rows come last.
    """
    A = [list(r) for r in M]
    m = len(A)
    ncols = len(A[0]) if m else 0
    U = _identity(m)
    row = 0
    for col in range(ncols):
        if row >= m:
            break
        piv = None
        for i in range(row, m):
            if A[i][col] != 0 and (piv is None or abs(A[i][col]) < abs(A[piv][col])):
                piv = i
        if piv is None:
            continue
        if piv != row:
            A[row], A[piv] = A[piv], A[row]
            U[row], U[piv] = U[piv], U[row]
        for i in range(row + 1, m):
            b = A[i][col]
            if b == 0:
                continue
            a = A[row][col]
            if b % a == 0:
                q = b // a
                A[i] = [x - q * y for x, y in zip(A[i], A[row])]
                U[i] = [x - q * y for x, y in zip(U[i], U[row])]
                continue
            g, s, t = xgcd(a, b)
            u, v = -b // g, a // g
            _row_combine(A, row, i, s, t, u, v)
            _row_combine(U, row, i, s, t, u, v)
        if A[row][col] < 0:
            A[row] = [-x for x in A[row]]
            U[row] = [-x for x in U[row]]
        p = A[row][col]
        for i in range(row):
            q = A[i][col] // p
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[row])]
                U[i] = [x - q * y for x, y in zip(U[i], U[row])]
        row += 1
    return A, U


def hnf_rank(H):
    return sum(1 for r in H if any(r))


def pivots(H):
    out = []
    for r in H:
        for j, x in enumerate(r):
            if x:
                out.append(j)
                break
    return out


def solve_hnf(H, v):
    """Integer z with z H = v (H in row HNF), or None if v is not in the row lattice."""
    v = list(v)
    piv = pivots(H)
    z = [0] * len(H)
    for i, j in enumerate(piv):
        if v[j] == 0:
            continue
        q, r = divmod(v[j], H[i][j])
        if r:
            return None
        z[i] = q
        v = [a - q * b for a, b in zip(v, H[i])]
    return z if not any(v) else None


# ------------------------------------------------------------------ SNF

def snf(M):
    """Smith normal form: (S, U, V) with U M V = S diagonal, d_1 | d_2 | ..."""
    A = [list(r) for r in M]
    m = len(A)
    n = len(A[0]) if m else 0
    U = _identity(m)
    V = _identity(n)
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = A[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        if i != t:
            A[t], A[i] = A[i], A[t]
            U[t], U[i] = U[i], U[t]
        if j != t:
            for r in A:
                r[t], r[j] = r[j], r[t]
            for r in V:
                r[t], r[j] = r[j], r[t]
        while True:
            for i in range(t + 1, m):
                b = A[i][t]
                if b == 0:
                    continue
                a = A[t][t]
                if b % a == 0:
                    q = b // a
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                    U[i] = [x - q * y for x, y in zip(U[i], U[t])]
                else:
                    g, s, x_ = xgcd(a, b)
                    _row_combine(A, t, i, s, x_, -b // g, a // g)
                    _row_combine(U, t, i, s, x_, -b // g, a // g)
            for j in range(t + 1, n):
                b = A[t][j]
                if b == 0:
                    continue
                a = A[t][t]
                if b % a == 0:
                    q = b // a
                    for r in A:
                        r[j] -= q * r[t]
                    for r in V:
                        r[j] -= q * r[t]
                else:
                    g, s, x_ = xgcd(a, b)
                    _col_combine(A, t, j, s, x_, -b // g, a // g)
                    _col_combine(V, t, j, s, x_, -b // g, a // g)
            if any(A[i][t] for i in range(t + 1, m)):
                continue
            d = A[t][t]
            bad = None
            for i in range(t + 1, m):
                if any(A[i][j] % d for j in range(t + 1, n)):
                    bad = i
                    break
            if bad is None:
                break
            A[t] = [x + y for x, y in zip(A[t], A[bad])]
            U[t] = [x + y for x, y in zip(U[t], U[bad])]
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return A, U, V


def inverse_unimodular(V):
    """Exact inverse of a unimodular integer matrix."""
    n = len(V)
    A = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(V)]
    for c in range(n):
        p = next(r for r in range(c, n) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    out = [[x for x in r[n:]] for r in A]
    if any(x.denominator != 1 for r in out for x in r):
        raise ArithmeticError("matrix is not unimodular")
    return [[int(x) for x in r] for r in out]


# ------------------------------------------------------------ class group

INFINITE = "Infinite"


@dataclass
class AbelianPresentation:
    """Cl = prod Z/d_i with one generator ideal per factor.

    ``from_fb[j]`` gives the class of factor-base prime j in the generators.
    ``gen_vectors[i]`` is the nonnegative exponent vector over the factor
    base of ``gens[i]``.
    """

    invariants: list
    gens: list
    from_fb: list
    gen_vectors: list = field(default_factory=list)
    # exact data for discrete logs and generators
    H: list = field(default_factory=list, repr=False)
    U: list = field(default_factory=list, repr=False)
    rank: int = 0
    m: int = 0

    @property
    def order(self):
        out = 1
        for d in self.invariants:
            out *= d
        return out

    def reduce(self, vec):
        return [v % d for v, d in zip(vec, self.invariants)]

    def class_of(self, fb_vector):
        """Class of an exponent vector over the factor base."""
        out = [0] * len(self.invariants)
        for j, e in enumerate(fb_vector):
            if e:
                for i, c in enumerate(self.from_fb[j]):
                    out[i] += e * c
        return self.reduce(out)


def dense_rows(rm):
    m = rm.m
    out = []
    for r in rm.rows:
        v = [0] * m
        for i, e in r.exponents:
            v[i] = e
        out.append(v)
    return out


def tentative_class_group(rm, fb):
    """Presentation of Z^m / (row lattice of rm) and its order (or INFINITE)."""
    m = len(fb.primes)
    K = fb.K
    rows = dense_rows(rm)
    if m == 0:
        return AbelianPresentation([], [], [], [], [], [], 0, 0), 1
    if not rows:
        rows_h, U = [], []
    else:
        rows_h, U = hnf(rows)
    rank = hnf_rank(rows_h) if rows_h else 0
    if rank < m:
        pres = AbelianPresentation([], [], [], [], rows_h, U, rank, m)
        return pres, INFINITE
    H = rows_h[:m]
    S, _, V = snf(H)
    diag = [S[i][i] for i in range(m)]
    Vinv = inverse_unimodular(V)
    keep = [i for i, d in enumerate(diag) if d != 1]
    invariants = [diag[i] for i in keep]
    from_fb = [[V[j][i] % diag[i] for i in keep] for j in range(m)]
    expo = invariants[-1] if invariants else 1
    gens = []
    gen_vectors = []
    for k, i in enumerate(keep):
        d = diag[i]
        # prefer a single prime whose class generates this factor alone
        choice = None
        for j in range(m):
            row = from_fb[j]
            if all(row[l] == 0 for l in range(len(keep)) if l != k) and gcd(row[k], d) == 1:
                choice = j
                break
        if choice is not None:
            c = from_fb[choice][k]
            cinv = pow(c, -1, d)
            for j in range(m):
                from_fb[j][k] = from_fb[j][k] * cinv % d
            vec = [0] * m
            vec[choice] = 1
        else:
            vec = [x % expo for x in Vinv[i]]
        gen_vectors.append(vec)
        gens.append(ideal_from_vector(K, fb, vec))
    pres = AbelianPresentation(invariants, gens, from_fb, gen_vectors, H, U, rank, m)
    return pres, pres.order


def ideal_from_vector(K, fb, vec):
    out = Ideal.unit(K)
    for j, e in enumerate(vec):
        if e < 0:
            raise ValueError("negative exponent")
        if e:
            out = out * (fb.primes[j].ideal ** e)
    return out


def relation_combination(pres, v):
    """Integer y with y . (relation rows) = v, or None if v is not a relation."""
    if not pres.H:
        return None if any(v) else [0] * len(pres.U)
    z = solve_hnf(pres.H[:pres.rank], v)
    if z is None:
        return None
    nrel = len(pres.U)
    y = [0] * nrel
    for i, c in enumerate(z):
        if c:
            for k, u in enumerate(pres.U[i]):
                if u:
                    y[k] += c * u
    return y


def kernel_vectors(pres):
    """Rows y with y . (relation rows) = 0 (from the HNF transform)."""
    return [list(r) for r in pres.U[pres.rank:]]


# ------------------------------------------------------------ discrete log

def fb_part_valuations(a: Ideal, fb):
    """Exponents of the factor-base primes in a."""
    out = [0] * len(fb.primes)
    N = a.norm
    for p, entries in fb.by_p.items():
        if N % p:
            continue
        for j, P in entries:
            out[j] = ideal_valuation(a, P)
    return out


def _ideal_gram(a: Ideal):
    K = a.K
    G = K.gram_t2()
    H = a.hnf
    n = K.n
    Gf = [[float(G[i][j]) for j in range(n)] for i in range(n)]
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = sum(H[i][k] * Gf[k][l] * H[j][l] for k in range(n) for l in range(n))
    return out


def ideal_lll_basis(a: Ideal):
    """LLL-reduced Z-basis of a (integral-basis coordinates) for T2."""
    K = a.K
    n = K.n
    cache = K._misc.setdefault("lll_basis", {})
    hit = cache.get(a.hnf)
    if hit is not None:
        return hit
    T, _ = lll_gram(_ideal_gram(a))
    out = [[sum(T[i][k] * a.hnf[k][l] for k in range(n)) for l in range(n)] for i in range(n)]
    if len(cache) > 20000:
        cache.clear()
    cache[a.hnf] = out
    return out


def ideal_short_elements(a: Ideal, count=20, rng=None):
    """Short elements of a: LLL basis vectors then small random combinations."""
    from .core_arith.field import FieldElement
    K = a.K
    n = K.n
    G = _ideal_gram(a)
    T, Gr = lll_gram(G)
    basis = [[sum(T[i][k] * a.hnf[k][l] for k in range(n)) for l in range(n)] for i in range(n)]
    out = []
    seen = set()
    b0 = Gr[0][0]
    for v in short_vectors(Gr, b0 * 2.0, max_count=count):
        c = tuple(sum(v[i] * basis[i][l] for i in range(n)) for l in range(n))
        if c not in seen:
            seen.add(c)
            out.append(FieldElement.make(K, list(c)))
    rng = rng or random.Random(0)
    while len(out) < count:
        coef = [rng.randint(-2, 2) for _ in range(n)]
        if not any(coef):
            continue
        c = tuple(sum(coef[i] * basis[i][l] for i in range(n)) for l in range(n))
        if c not in seen:
            seen.add(c)
            out.append(FieldElement.make(K, list(c)))
    return out


def quotient_vector(beta, a: Ideal, fb, a_vals=None):
    """Exponents of c = (beta) / a over the factor base, or None if c is not fb-smooth.

    beta must lie in a.  ``a_vals`` may pass the factor-base valuations of a.
    """
    m = len(fb.primes)
    N = abs(beta.norm())
    if N.denominator != 1 or N.numerator % a.norm:
        return None
    Nc = N.numerator // a.norm
    if a_vals is None:
        a_vals = fb_part_valuations(a, fb)
    rest = Nc
    vec = [0] * m
    NN = N.numerator
    for p, entries in fb.by_p.items():
        if NN % p:
            continue
        k = 0
        while rest % p == 0:
            rest //= p
            k += 1
        tot = 0
        for j, P in entries:
            c = ideal_valuation(beta, P) - a_vals[j]
            if c < 0:
                return None
            vec[j] = c
            tot += c * P.fdeg
        if tot != k:
            return None
    if rest != 1:
        return None
    return vec


def class_dlog(a: Ideal, rm, fb, budget=2000, pres=None, seed=0):
    """Class of the ideal a in the generators of ``pres``.

    Searches beta in a*b (b a random product of factor-base primes) such
    that c = (beta)/(a b) factors over the factor base; then
    [a] = -[b] - [c].  Raises BudgetExhausted after ``budget`` tests.
    """
    if pres is None:
        pres, h = tentative_class_group(rm, fb)
        if h == INFINITE:
            raise InconsistentPresentation("relation lattice is not of full rank")
    m = len(fb.primes)
    if m == 0 or not pres.invariants:
        if m == 0 and not a.is_one():
            raise BudgetExhausted("empty factor base")
        return []
    rng = random.Random(seed * 1000003 + sum(sum(r) for r in a.hnf) % 1000003)
    tests = 0
    mult = [0] * m
    b = Ideal.unit(a.K)
    while tests < budget:
        ab = a * b
        ab_vals = fb_part_valuations(ab, fb)
        for beta in ideal_short_elements(ab, count=8, rng=rng):
            tests += 1
            c = quotient_vector(beta, ab, fb, ab_vals)
            if c is not None:
                return pres.class_of([-(mult[i] + c[i]) for i in range(m)])
            if tests >= budget:
                break
        j = rng.randrange(m)
        mult[j] += 1
        b = b * fb.primes[j].ideal
    raise BudgetExhausted("class_dlog: no smooth multiple found")


__all__ = ["hnf", "snf", "solve_hnf", "inverse_unimodular", "AbelianPresentation",
           "tentative_class_group", "class_dlog", "relation_combination",
           "kernel_vectors", "ideal_from_vector", "INFINITE", "dense_rows",
           "ideal_short_elements", "ideal_lll_basis", "fb_part_valuations", "quotient_vector"]
