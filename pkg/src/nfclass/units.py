"""Unit group: torsion, unit lattice from relation kernels, regulator,
regulator lower bound, index bound, and l-saturation by reduction modulo
degree-one primes.

Units are kept as power products of relation elements throughout.  The
weighted log vector of u is L(u) = (w_k log|sigma_k(u)|) over the r1 + r2
places with w_k = 1 for real and 2 for complex places; it sums to 0 and
the regulator is |det| of any (r x r) minor obtained by deleting one place.

Regulator lower bound: every unit u with T2(u) > T has some place with
log|sigma(u)| > log(T/n)/2, so |L(u)| >= log(T/n)/2.  Enumerating all
elements with T2 <= T therefore bounds the first successive minimum lambda1
of the unit lattice from below, and Minkowski's second theorem gives
covol >= lambda1^r V_r / 2^r, with R = covol / sqrt(r + 1).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .core_arith.field import FieldElement, NumberField
from .core_arith.intervals import hi, iv, lo, mid, mp, precision
from sympy import ZZ, isprime
from sympy.polys.matrices import DomainMatrix

from .core_arith.intmath import nullspace_mod
from .core_arith.lattice import lll_gram, short_vectors
from .core_arith.powerprod import PowerProduct, expand_mod
from .errors import NotInSubgroup, RankDeficient, ZeroElement

PREC = 128


# ------------------------------------------------------------ embeddings

def log_embedding(x, K: NumberField = None, prec=PREC):
    """(log|sigma_k(x)|)_k over the r1 + r2 places, as intervals (unweighted)."""
    if isinstance(x, FieldElement):
        if x.is_zero():
            raise ZeroElement("log embedding of zero")
        return x.log_abs(prec)
    if isinstance(x, PowerProduct):
        return x.log_abs(prec, K)
    raise TypeError("expected FieldElement or PowerProduct")


def weights(K):
    return [1] * K.r1 + [2] * K.r2


def weighted_log(x, K, prec=PREC):
    with precision(prec):
        return [w * v for w, v in zip(weights(K), log_embedding(x, K, prec))]


def _prec_for(pp: PowerProduct):
    e = pp.max_exponent() if isinstance(pp, PowerProduct) else 1
    return PREC + 2 * max(1, e).bit_length() + 8 * len(pp) if isinstance(pp, PowerProduct) else PREC


# ------------------------------------------------------------ torsion

def roots_of_unity(K: NumberField):
    """(w, zeta) with zeta a generator of the torsion subgroup."""
    cache = K._misc
    if "roots_of_unity" in cache:
        return cache["roots_of_unity"]
    if K.r1 > 0 or K.n == 1:
        out = (2, K.from_int(-1))
        cache["roots_of_unity"] = out
        return out
    n = K.n
    G = [[float(x) for x in r] for r in K.gram_t2()]
    T, Gr = lll_gram(G)
    best = (2, K.from_int(-1))
    for v in short_vectors(Gr, n * (1 + 1e-6)):
        c = [sum(v[i] * T[i][l] for i in range(n)) for l in range(n)]
        x = FieldElement.make(K, c)
        if abs(x.norm()) != 1:
            continue
        for sgn in (1, -1):
            y = x if sgn == 1 else -x
            o = _torsion_order(y, K, limit=4 * n * n + 10)
            if o and o > best[0]:
                best = (o, y)
    cache["roots_of_unity"] = best
    return best


def _torsion_order(x, K, limit):
    one = K.one
    y = x
    for k in range(1, limit + 1):
        if y == one:
            return k
        y = y * x
    return None


# ------------------------------------------------------------ candidates

def unit_candidates(rm, pres=None):
    """Power products of relation elements with trivial factorisation.

    The exponent vectors come from the kernel rows of the HNF transform of
    the relation matrix.  Trivial products are dropped.
    """
    from .linalg import hnf, hnf_rank, dense_rows
    rows = dense_rows(rm)
    if not rows:
        return []
    if pres is not None and pres.U:
        U, rank = pres.U, pres.rank
    else:
        H, U = hnf(rows)
        rank = hnf_rank(H)
    out = []
    for y in reduced_kernel(U[rank:]):
        pp = PowerProduct.make([])
        for c, r in zip(y, rm.rows):
            if c:
                pp = pp * (r.element ** c)
        if not pp.is_empty():
            out.append(pp)
    return out


def reduced_kernel(rows):
    """LLL-reduced basis of the integer lattice spanned by ``rows``.

    Kernel rows of an HNF transform can have hundreds of digits; reduced
    ones give power products with small exponents.
    """
    rows = [list(r) for r in rows if any(r)]
    if len(rows) < 2:
        return rows
    D = DomainMatrix([[ZZ(x) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    red = D.lll().to_list()
    return [[int(x) for x in r] for r in red if any(r)]


# ------------------------------------------------------------ unit lattice

class UnitLattice:
    """Incrementally built basis of the subgroup generated by given units.

    Dependencies between candidate log vectors are recognised as rationals
    with bounded denominator and resolved by an exact HNF over the
    coefficients, so the basis always consists of genuine power products.
    """

    def __init__(self, K: NumberField, prec=PREC, max_den=10 ** 6):
        self.K = K
        self.r = K.unit_rank
        self.prec = prec
        self.max_den = max_den
        self.basis: list[PowerProduct] = []
        self.vecs: list = []  # mp weighted logs, first r coordinates

    def _vec(self, pp):
        p = max(self.prec, _prec_for(pp))
        with precision(p):
            L = weighted_log(pp, self.K, p)
            return [mid(v) for v in L[: self.r]], max(hi(v) - lo(v) for v in L)

    def add(self, pp: PowerProduct) -> bool:
        """Add a unit; returns True if the lattice grew."""
        if self.r == 0:
            return False
        v, err = self._vec(pp)
        with mpmath.workprec(self.prec):
            scale = max([abs(x) for x in v] + [mpmath.mpf(1)])
            tol = max(err * 1000, mpmath.mpf(2) ** (-self.prec // 2)) * scale
            if max(abs(x) for x in v) <= tol:
                return False  # torsion
            k = len(self.basis)
            c = self._coefficients(v) if k else None
            if c is not None:
                resid = [v[i] - sum(c[j] * self.vecs[j][i] for j in range(k)) for i in range(self.r)]
                dependent = max(abs(x) for x in resid) <= tol * (1 + sum(abs(x) for x in c))
            else:
                dependent = False
            if not dependent:
                if k >= self.r:
                    return False
                self.basis.append(pp)
                self.vecs.append(v)
                return True
            fracs = [Fraction(str(mpmath.nstr(x, 40))).limit_denominator(self.max_den) for x in c]
            for x, f_ in zip(c, fracs):
                if abs(x - mpmath.mpf(f_.numerator) / f_.denominator) > mpmath.mpf(10) ** -8:
                    return False
            return self.merge_rational(pp, fracs)

    def _coefficients(self, v):
        """Least-squares coefficients of v in the current basis vectors."""
        k = len(self.vecs)
        key = tuple(id(b) for b in self.basis)
        if getattr(self, "_ginv_key", None) != key:
            A = mpmath.matrix([[sum(self.vecs[i][t] * self.vecs[j][t] for t in range(self.r))
                                for j in range(k)] for i in range(k)])
            try:
                self._ginv = A ** -1
            except ZeroDivisionError:
                self._ginv = None
            self._ginv_key = key
        if self._ginv is None:
            return None
        b = [sum(self.vecs[i][t] * v[t] for t in range(self.r)) for i in range(k)]
        G = self._ginv
        return [sum(G[i, j] * b[j] for j in range(k)) for i in range(k)]

    def merge_rational(self, pp, fracs) -> bool:
        """Adjoin pp whose log vector equals sum fracs[j] * basis[j]."""
        from .linalg import hnf
        if all(f_.denominator == 1 for f_ in fracs):
            return False
        k = len(self.basis)
        D = 1
        for f_ in fracs:
            D = D * f_.denominator // math.gcd(D, f_.denominator)
        rows = [[D if i == j else 0 for j in range(k)] for i in range(k)]
        rows.append([int(f_ * D) for f_ in fracs])
        H, U = hnf(rows)
        gens = self.basis + [pp]
        new = []
        for i in range(k):
            prod = PowerProduct.make([])
            for c, g in zip(U[i], gens):
                if c:
                    prod = prod * (g ** c)
            new.append(prod)
        self.basis = new
        self.vecs = [self._vec(b)[0] for b in new]
        self.reduce()
        return True

    def reduce(self):
        """LLL in log space to keep exponents small."""
        k = len(self.basis)
        if k < 2:
            return
        with mpmath.workprec(self.prec):
            G = [[sum(self.vecs[i][t] * self.vecs[j][t] for t in range(self.r)) for j in range(k)]
                 for i in range(k)]
            T, _ = lll_gram(G)
        new = []
        for row in T:
            prod = PowerProduct.make([])
            for c, g in zip(row, self.basis):
                if c:
                    prod = prod * (g ** c)
            new.append(prod)
        self.basis = new
        self.vecs = [self._vec(b)[0] for b in new]

    @property
    def full(self):
        return len(self.basis) == self.r


def regulator(units, K: NumberField, prec=PREC):
    """|det| of the weighted log matrix with the last place deleted, as an interval."""
    r = K.unit_rank
    if r == 0:
        with precision(prec):
            return iv.mpf(1)
    if len(units) != r:
        raise RankDeficient(f"need {r} units, got {len(units)}")
    p = max([prec] + [_prec_for(u) for u in units])
    with precision(p):
        M = [weighted_log(u, K, p)[:r] for u in units]
        det = _interval_det(M)
        if lo(det) <= 0 <= hi(det):
            raise RankDeficient("units are dependent (regulator interval contains 0)")
        val = abs(det) if lo(det) > 0 else -det
    with precision(prec):
        return +val


def _interval_det(M):
    A = [list(r) for r in M]
    n = len(A)
    det = iv.mpf(1)
    for c in range(n):
        piv = max(range(c, n), key=lambda i: mid(abs(A[i][c])))
        if lo(abs(A[piv][c])) <= 0:
            return iv.mpf([-mpmath.inf, mpmath.inf])
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det = det * A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return det


# ------------------------------------------------------------ lower bound

@dataclass
class LowerBound:
    regulator: object      # mpf, or +inf when the rank is 0
    lambda1: object        # lower bound for |L(u)|, u non-torsion
    T: float               # enumeration radius actually completed
    torsion: list          # roots of unity met during the enumeration
    units: list            # non-torsion units met during the enumeration


def regulator_lower_bound(K: NumberField, max_count=200000) -> LowerBound:
    """Lower bound for the regulator by enumeration below twice the last LLL vector."""
    r = K.unit_rank
    if r == 0:
        return LowerBound(mpmath.inf, mpmath.inf, 0.0, [], [])
    n = K.n
    G = [[float(x) for x in row] for row in K.gram_t2()]
    T, Gr = lll_gram(G)
    bound = 2.0 * Gr[n - 1][n - 1]
    bound = max(bound, 4.0 * n)
    # skip radii whose expected point count (ellipsoid volume / covolume) is far too large
    logdet = sum(math.log(gso_norm) for gso_norm in _gso_norms(Gr))
    while bound > 4.0 * n:
        logvol = (n / 2) * math.log(math.pi * bound) - math.lgamma(n / 2 + 1) - logdet / 2
        if logvol <= math.log(max_count / 2):
            break
        bound /= 2
    while True:
        vecs = short_vectors(Gr, bound, max_count=max_count)
        if len(vecs) < max_count:
            break
        bound /= 2
    torsion, units = [], []
    lam = None
    with precision(PREC):
        for v in vecs:
            c = [sum(v[i] * T[i][l] for i in range(n)) for l in range(n)]
            x = FieldElement.make(K, c)
            if abs(x.norm()) != 1:
                continue
            L = weighted_log(x, K)
            norm2 = sum(t * t for t in L)
            if lo(norm2) <= 0 and hi(norm2) < 1e-20:
                torsion.append(x)
                continue
            units.append(x)
            length = lo(iv.sqrt(norm2))
            lam = length if lam is None else min(lam, length)
        # units with T2 below this radius were all enumerated
        Tsafe = mp.mpf(bound) * (1 - mp.mpf(10) ** -6)
        lam_out = lo(iv.log(iv.mpf(Tsafe) / n) / 2)
        lam = lam_out if lam is None else min(lam, lam_out)
        if lam <= 0:
            return LowerBound(mp.mpf(0), mp.mpf(0), bound, torsion, units)
        Vr = iv.pi ** (iv.mpf(r) / 2) / iv.gamma(iv.mpf(r) / 2 + 1)
        covol = iv.mpf(lam) ** r * Vr / iv.mpf(2) ** r
        R = lo(covol / iv.sqrt(iv.mpf(r + 1)))
    return LowerBound(R, lam, bound, torsion, units)


def _gso_norms(G):
    """Squared Gram-Schmidt lengths of a Gram matrix (Cholesky diagonal)."""
    n = len(G)
    L = [[0.0] * n for _ in range(n)]
    out = []
    for i in range(n):
        for j in range(i + 1):
            v = G[i][j] - sum(L[i][k] * L[j][k] for k in range(j))
            if i == j:
                v = max(v, 1e-300)
                L[i][i] = math.sqrt(v)
                out.append(v)
            else:
                L[i][j] = v / L[j][j]
    return out


def index_bound(known_reg, lower) -> int:
    """floor(upper end of known_reg / lower)."""
    if lower is None or (not mpmath.isinf(lower) and lower <= 0):
        raise ValueError("lower bound must be positive")
    if mpmath.isinf(lower):
        return 1
    with precision(PREC):
        q = iv.mpf(hi(known_reg)) / iv.mpf(lower)
        return int(mpmath.floor(hi(q)))


# ------------------------------------------------------------ results

@dataclass
class UnitGroupResult:
    w: int
    zeta: FieldElement
    fund_units: list
    regulator: object
    proof: str = "GRHConditional"
    lower: LowerBound = None
    min_p: int = 2
    saturated_primes: list = field(default_factory=list)

    @property
    def rank(self):
        return len(self.fund_units)


@dataclass(frozen=True)
class Saturated:
    pass


@dataclass(frozen=True)
class Enlarged:
    unit: PowerProduct
    ell: int
    combination: tuple


@dataclass(frozen=True)
class Undecided:
    ell: int
    survivors: int


# ------------------------------------------------------------ saturation

def dlog_residue(g, base, ell: int, R):
    """k mod ell with g = base^k in the order-ell quotient of (O/P)^*.

    ``R`` is the residue field (or an integer prime modulus).
    """
    if isinstance(R, int):
        q = R
        powf = lambda a, e: pow(a, e, q)  # noqa: E731
        mul = lambda a, b: a * b % q  # noqa: E731
        one = 1
    else:
        q = R.q
        powf, mul, one = R.pow, R.mul, R.one
    if (q - 1) % ell:
        raise NotInSubgroup("ell does not divide the group order")
    e = (q - 1) // ell
    gp = powf(g, e)
    bp = powf(base, e)
    if bp == one:
        if gp == one:
            return 0
        raise NotInSubgroup("base is an ell-th power")
    s = math.isqrt(ell - 1) + 1
    baby = {}
    cur = one
    for j in range(s):
        baby.setdefault(cur, j)
        cur = mul(cur, bp)
    giant = powf(bp, (ell - s) % ell)  # bp^{-s}
    cur = gp
    for i in range(s + 1):
        if cur in baby:
            return (i * s + baby[cur]) % ell
        cur = mul(cur, giant)
    raise NotInSubgroup("element not in the subgroup")


_cache_lock = threading.Lock()


def saturation_primes(K: NumberField, ell: int, count: int, min_p: int):
    """Degree-one primes P with p = 1 mod ell, p > min_p, p prime to disc; cached."""
    with _cache_lock:
        store = K._misc.setdefault("sat_primes", {})
        lst = store.setdefault((ell, min_p), [])
        if len(lst) >= count:
            return lst[:count]
    found = []
    p = max(min_p + 1, ell + 1)
    p += (1 - p) % ell
    while len(found) < count:
        if isprime(p) and K.poly_disc % p and K.disc % p:
            for P in K.decompose(p):
                if P.fdeg == 1:
                    R = P.residue()
                    t = 2
                    while pow(t, (p - 1) // ell, p) == 1:
                        t += 1
                    found.append((P, R, t))
                    if len(found) >= count:
                        break
        p += ell
    with _cache_lock:
        lst = K._misc["sat_primes"][(ell, min_p)]
        if len(found) > len(lst):
            lst[:] = found
        return lst[:count]


def dlog_matrix(gens, ell, primes):
    rows = []
    for g in gens:
        row = []
        for P, R, t in primes:
            row.append(dlog_residue(expand_mod(g, P), t, ell, R))
        rows.append(row)
    return rows


def ell_root(y: PowerProduct, ell: int, K: NumberField, w: int, zeta, verify="exact",
             lam=None, max_bits=4000):
    """An element x with x^ell = y * (root of unity), or None.

    The embeddings of x are fixed up to roots of unity by those of y; each
    choice is solved for integral-basis coordinates, rounded, and verified.
    ``verify="unit"`` accepts x when N(x) = +-1 and |ell L(x) - L(y)| is
    below lam/2 (so the quotient is torsion); otherwise y is expanded and
    compared exactly.
    """
    n, r1, r2 = K.n, K.r1, K.r2
    p0 = _prec_for(y)
    with precision(p0):
        L = log_embedding(y, K, p0)
        big = max(abs(mid(v)) for v in L) / ell
    bits = int(big / math.log(2)) + 2 * n + 96
    if bits > max_bits:
        return None
    prec = max(p0, bits + 64)
    with mpmath.workprec(prec):
        logs = [mid(v) for v in log_embedding(y, K, prec)]
        args = _args(y, K, prec)
        emb = K.basis_embeddings(prec)
        rows = []
        for k in range(r1):
            rows.append([mid(emb[k][j][0]) for j in range(n)])
        for k in range(r1, r1 + r2):
            rows.append([mid(emb[k][j][0]) for j in range(n)])
            rows.append([mid(emb[k][j][1]) for j in range(n)])
        M = mpmath.matrix(rows)
        Minv = M ** -1
        mags = [mpmath.exp(l_ / ell) for l_ in logs]
        choices = []
        if r1:
            # signs; x and -x only differ by torsion
            for mask in range(1 << max(r1 - 1, 0)):
                sg = [1] + [(-1) ** ((mask >> i) & 1) for i in range(r1 - 1)]
                for ks in _product([range(ell)] * r2):
                    choices.append((sg, [(args[r1 + i] + 2 * mpmath.pi * ks[i]) / ell
                                         for i in range(r2)]))
        else:
            for j in range(w):
                for ks in _product([range(ell)] * r2):
                    choices.append(([], [(args[i] + 2 * mpmath.pi * (j / mpmath.mpf(w) + ks[i])) / ell
                                         for i in range(r2)]))
        yexp = None
        for sg, th in choices:
            rhs = [s * m_ for s, m_ in zip(sg, mags[:r1])]
            for i in range(r2):
                m_ = mags[r1 + i]
                rhs += [m_ * mpmath.cos(th[i]), m_ * mpmath.sin(th[i])]
            c = Minv * mpmath.matrix(rhs)
            ci = [int(mpmath.nint(c[i])) for i in range(n)]
            if any(abs(c[i] - ci[i]) > mpmath.mpf(10) ** -6 for i in range(n)):
                continue
            x = FieldElement.make(K, ci)
            if x.is_zero():
                continue
            if verify == "unit":
                if abs(x.norm()) != 1:
                    continue
                with precision(prec):
                    Lx = weighted_log(x, K, prec)
                    Ly = weighted_log(y, K, prec)
                    d2 = sum((ell * a - b) ** 2 for a, b in zip(Lx, Ly))
                    if hi(d2) < (lam / 2) ** 2:
                        return x
            else:
                if yexp is None:
                    yexp = y.expand(K)
                xe = x ** ell
                z = K.one
                for _ in range(w):
                    if xe == yexp * z:
                        return x
                    z = z * zeta
        return None


def _product(ranges):
    import itertools
    return itertools.product(*ranges)


def _args(y: PowerProduct, K, prec):
    """Arguments of sigma_k(y) at every place (mod 2 pi), from the factors."""
    out = [mpmath.mpf(0)] * (K.r1 + K.r2)
    with precision(prec):
        for x, e in y.factors:
            for k, (a, b) in enumerate(x.embeddings(prec)):
                out[k] += e * mpmath.atan2(mid(b), mid(a))
    return [mpmath.fmod(t, 2 * mpmath.pi) for t in out]


def _generators_for(U: UnitGroupResult, ell):
    gens = list(U.fund_units)
    with_torsion = U.w % ell == 0
    if with_torsion:
        gens = [PowerProduct.of(U.zeta)] + gens
    return gens, with_torsion


def saturate_units(U: UnitGroupResult, ell: int, m: int = None, K: NumberField = None,
                   max_doublings=4):
    """One l-saturation attempt: Saturated, Enlarged(new unit) or Undecided."""
    K = K or U.zeta.K
    if U.rank == 0:
        return Saturated()
    if m is None:
        m = max(10, K.r1 + K.r2 + 3)
    gens, with_torsion = _generators_for(U, ell)
    lam = U.lower.lambda1 if U.lower is not None and U.lower.lambda1 > 0 else None
    for attempt in range(max_doublings + 1):
        primes = saturation_primes(K, ell, m, U.min_p)
        A = dlog_matrix(gens, ell, primes)
        kern = nullspace_mod(A, ell)
        if not kern:
            return Saturated()
        for c in kern:
            free = c[1:] if with_torsion else c
            if not any(x % ell for x in free):
                continue
            y = PowerProduct.make([])
            for ci, g in zip(c, gens):
                if ci:
                    y = y * (g ** ci)
            x = ell_root(y, ell, K, U.w, U.zeta, verify="unit" if lam else "exact", lam=lam)
            if x is not None:
                return Enlarged(PowerProduct.of(x), ell, tuple(free))
        m *= 2
    return Undecided(ell, len(kern))


def apply_enlargement(U: UnitGroupResult, E: Enlarged, K: NumberField):
    """New basis after adjoining a unit whose ell-th power is prod u_i^{c_i}."""
    lat = UnitLattice(K)
    lat.basis = list(U.fund_units)
    lat.vecs = [lat._vec(b)[0] for b in lat.basis]
    fr = [Fraction(c % E.ell, E.ell) for c in E.combination]
    lat.merge_rational(E.unit, fr)
    reg = regulator(lat.basis, K)
    return UnitGroupResult(U.w, U.zeta, lat.basis, reg, U.proof, U.lower, U.min_p,
                           list(U.saturated_primes))


def saturate_fully(U: UnitGroupResult, ell: int, K: NumberField, m=None):
    """Repeat saturation at ell until Saturated; returns (U, status)."""
    for _ in range(64):
        res = saturate_units(U, ell, m, K)
        if isinstance(res, Enlarged):
            U = apply_enlargement(U, res, K)
            continue
        return U, res
    return U, Undecided(ell, -1)


def build_unit_group(K: NumberField, candidates, extra_units=(), min_p=2):
    """UnitGroupResult from candidate units (power products), or None if rank is short."""
    w, zeta = roots_of_unity(K)
    lat = UnitLattice(K)
    for u in list(extra_units) + list(candidates):
        lat.add(u)
    if not lat.full:
        return None, lat
    reg = regulator(lat.basis, K) if K.unit_rank else None
    if reg is None:
        with precision(PREC):
            reg = iv.mpf(1)
    return UnitGroupResult(w, zeta, lat.basis, reg, min_p=min_p), lat


__all__ = ["log_embedding", "weighted_log", "roots_of_unity", "unit_candidates",
           "UnitLattice", "regulator", "regulator_lower_bound", "LowerBound",
           "index_bound", "UnitGroupResult", "Saturated", "Enlarged", "Undecided",
           "dlog_residue", "saturate_units", "saturate_fully", "apply_enlargement",
           "ell_root", "saturation_primes", "dlog_matrix", "build_unit_group"]
