"""Factor base and relation collection.

A relation is an element whose principal ideal factors over the factor
base; its exponent vector is the image under phi.  The search interleaves
exhaustive enumeration of small elements of O_K with randomised trials in
products of factor-base primes.
"""

from __future__ import annotations

import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .core_arith.field import FieldElement, NumberField
from .core_arith.ideal import Ideal, PrimeIdeal, ideal_valuation
from .core_arith.intmath import primes_up_to
from .core_arith.lattice import lll_gram, short_vectors
from .core_arith.powerprod import PowerProduct
from .errors import BudgetExhausted, ZeroElement

DEFAULT_BUDGET = 10 ** 6
_RANK_PRIME = (1 << 61) - 1


@dataclass
class FactorBase:
    K: NumberField
    B: int
    primes: list
    index: dict = field(default_factory=dict)
    by_p: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.primes)

    def position(self, P):
        return self.index.get(P.ideal.hnf)

    def without(self, positions):
        """A copy with the given positions removed (used for fault injection)."""
        drop = set(positions)
        return _make_fb(self.K, self.B, [P for i, P in enumerate(self.primes) if i not in drop])


def _make_fb(K, B, primes):
    primes = sorted(primes, key=lambda P: P.sort_key())
    fb = FactorBase(K, B, primes)
    for i, P in enumerate(primes):
        fb.index[P.ideal.hnf] = i
        fb.by_p.setdefault(P.p, []).append((i, P))
    return fb


def build_factor_base(K: NumberField, B: int) -> FactorBase:
    """All prime ideals of norm <= B, sorted by norm then p."""
    if B < 1:
        raise ValueError("B must be at least 1")
    out = []
    for p in primes_up_to(B):
        for P in K.decompose(p):
            if P.norm <= B:
                out.append(P)
    return _make_fb(K, B, out)


@dataclass(frozen=True)
class Relation:
    element: PowerProduct
    exponents: tuple  # sorted (index, exponent) pairs, zeros omitted

    def dense(self, m):
        v = [0] * m
        for i, e in self.exponents:
            v[i] = e
        return v


@dataclass
class RelationMatrix:
    rows: list
    m: int

    def __len__(self):
        return len(self.rows)

    def dense(self):
        return [r.dense(self.m) for r in self.rows]

    def rank(self):
        return _ModRank(self.m).extend(r.dense(self.m) for r in self.rows)


class _ModRank:
    """Incremental rank over Z/p for a large prime p."""

    def __init__(self, m):
        self.m = m
        self.rows = {}  # pivot column -> normalised row

    def add(self, v):
        p = _RANK_PRIME
        v = [x % p for x in v]
        for j in range(self.m):
            if v[j] == 0:
                continue
            r = self.rows.get(j)
            if r is None:
                inv = pow(v[j], -1, p)
                self.rows[j] = [x * inv % p for x in v]
                return True
            c = v[j]
            v = [(x - c * y) % p for x, y in zip(v, r)]
        return False

    def extend(self, vs):
        for v in vs:
            self.add(v)
        return len(self.rows)

    @property
    def rank(self):
        return len(self.rows)


# ------------------------------------------------------------ smoothness

def _sparse(vec):
    return tuple((i, e) for i, e in enumerate(vec) if e)


def smooth_factorize(x, fb: FactorBase):
    """Sparse phi(x) over fb as sorted (index, exponent) pairs, or None.

    x must be a nonzero integral element (or a power product, whose
    valuations are summed without expansion).
    """
    if isinstance(x, PowerProduct):
        return _pp_vector(x, fb)
    if x.is_zero():
        raise ZeroElement("smooth_factorize of zero")
    N = abs(x.norm())
    if N.denominator != 1:
        raise ValueError("element is not integral")
    N = N.numerator
    vec = [0] * len(fb.primes)
    rest = N
    for p, entries in fb.by_p.items():
        if rest % p:
            continue
        k = 0
        while rest % p == 0:
            rest //= p
            k += 1
        tot = 0
        for j, P in entries:
            v = ideal_valuation(x, P)
            vec[j] = v
            tot += v * P.fdeg
        if tot != k:
            return None
        if rest == 1:
            break
    if rest != 1:
        return None
    return _sparse(vec)


def _pp_vector(pp: PowerProduct, fb: FactorBase):
    N = pp.norm()
    num, den = abs(N.numerator), N.denominator
    vec = [0] * len(fb.primes)
    K = fb.K
    for p in sorted(set(fb.by_p)):
        if num % p and den % p:
            continue
        for P in K.decompose(p):
            v = pp.valuation(P)
            j = fb.position(P)
            if j is None:
                if v:
                    return None
            else:
                vec[j] = v
        while num % p == 0:
            num //= p
        while den % p == 0:
            den //= p
    if num != 1 or den != 1:
        return None
    return _sparse(vec)


def verify_relation(r: Relation, fb: FactorBase) -> bool:
    """Recompute phi(element) exactly and compare with the stored exponents."""
    pp = r.element
    K = fb.K
    N = pp.norm()
    num, den = abs(N.numerator), N.denominator
    vec = [0] * len(fb.primes)
    ps = set()
    for part in (num, den):
        for p in fb.by_p:
            if part % p == 0:
                ps.add(p)
    for p in sorted(ps):
        for P in K.decompose(p):
            v = pp.valuation(P)
            j = fb.position(P)
            if j is None:
                if v:
                    return False
            else:
                vec[j] = v
        while num % p == 0:
            num //= p
        while den % p == 0:
            den //= p
    if num != 1 or den != 1:
        return False
    # the norm identity must match as well
    prod = Fraction(1)
    for j, e in enumerate(vec):
        if e:
            prod *= Fraction(fb.primes[j].norm) ** e
    if prod != abs(N):
        return False
    return _sparse(vec) == tuple(r.exponents)


# ------------------------------------------------------------ search

def _normalise_sign(coords):
    for c in coords:
        if c:
            return tuple(coords) if c > 0 else tuple(-x for x in coords)
    return tuple(coords)


class _Searcher:
    """One seeded worker: enumeration plus randomised ideal-product trials."""

    def __init__(self, K, fb, seed, budget, enumerate_small=True):
        self.K = K
        self.fb = fb
        self.rng = random.Random(seed)
        self.budget = budget
        self.tests = 0
        self.enumerate_small = enumerate_small
        n = K.n
        G = [[float(x) for x in r] for r in K.gram_t2()]
        self.T, self.G = lll_gram(G)
        self.radius = None
        self.last_radius = 0.0
        self.n = n

    def _elt(self, v):
        n = self.n
        c = [sum(v[i] * self.T[i][l] for i in range(n)) for l in range(n)]
        return c

    def small_elements(self):
        """Integral elements in shells of growing T2 radius."""
        if self.radius is None:
            self.radius = float(self.n) * 1.0001
        while True:
            vecs = short_vectors(self.G, self.radius, max_count=200000)
            batch = []
            for v in vecs:
                q = sum(self.G[i][j] * v[i] * v[j] for i in range(self.n) for j in range(self.n))
                if q > self.last_radius * (1 + 1e-9) or self.last_radius == 0:
                    batch.append(self._elt(v))
            self.last_radius = self.radius
            self.radius *= 1.6
            yield from batch

    def random_trials(self, uncovered=None):
        """Elements of P_j * (random small primes), cycling j over the factor base.

        ``uncovered`` returns the columns still missing from the rank; those
        primes are tried first in every cycle.
        """
        from .linalg import ideal_lll_basis
        fb = self.fb
        m = len(fb.primes)
        K = self.K
        n = self.n
        small = min(m, 12)
        while True:
            order = list(range(m))
            self.rng.shuffle(order)
            if uncovered is not None:
                miss = uncovered()
                order = [j for j in order if j in miss] + [j for j in order if j not in miss]
            for j in order:
                I = fb.primes[j].ideal
                for _ in range(self.rng.randint(0, 2)):
                    I = I * (fb.primes[self.rng.randrange(small)].ideal ** self.rng.randint(1, 2))
                basis = ideal_lll_basis(I)
                for _ in range(4):
                    coef = [self.rng.randint(-2, 2) for _ in range(n)]
                    if not any(coef):
                        coef[0] = 1
                    yield [sum(coef[i] * basis[i][l] for i in range(n)) for l in range(n)]


def collect_relations(K, fb: FactorBase, target_rank: int, budget=DEFAULT_BUDGET,
                      seed=0, threads=1, extra=None, existing=None):
    """Collect relations until rank >= target_rank and enough extra rows exist.

    ``extra`` is the number of rows wanted beyond the rank (default
    r1 + r2 + 10), which supplies unit candidates and helps the lattice
    saturate.  ``existing`` lets a caller continue a previous search.
    Deterministic for fixed (seed, budget, threads).  Raises
    BudgetExhausted with ``partial`` set to the matrix found so far.
    """
    m = len(fb.primes)
    if extra is None:
        extra = K.r1 + K.r2 + 10
    rm = existing if existing is not None else RelationMatrix([], m)
    if m == 0 and target_rank <= 0 and len(rm.rows) >= extra:
        return rm
    lock = threading.Lock()
    state = {"rank": _ModRank(m), "seen": set(), "done": False}
    for r in rm.rows:
        state["rank"].add(r.dense(m))
        for x, _ in r.element.factors:
            state["seen"].add(_normalise_sign(x.coords))
    want_rows = target_rank + extra

    def finished():
        return state["rank"].rank >= target_rank and len(rm.rows) >= want_rows

    def uncovered():
        with lock:
            return set(range(m)) - set(state["rank"].rows)

    def offer(coords, results):
        key = _normalise_sign(coords)
        if not any(key) or key in state["seen"]:
            return
        x = FieldElement.make(K, list(key))
        vec = smooth_factorize(x, fb) if m else (() if abs(x.norm()) == 1 else None)
        if vec is None:
            return
        results.append((key, vec))

    def worker(w, share):
        s = _Searcher(K, fb, seed * 1000003 + w, share)
        gens = []
        if w == 0:
            gens.append(s.small_elements())
        if m:
            gens.append(s.random_trials(uncovered))
        # one test from each source in turn
        gi = 0
        while s.tests < share:
            with lock:
                if state["done"]:
                    break
            coords = next(gens[gi % len(gens)])
            gi += 1
            s.tests += 1
            local = []
            offer(coords, local)
            if not local:
                continue
            with lock:
                key, vec = local[0]
                if key in state["seen"]:
                    continue
                state["seen"].add(key)
                dense = [0] * m
                for i, e in vec:
                    dense[i] = e
                grew = state["rank"].add(dense)
                # rows that do not raise the rank are kept only up to ``extra``
                if not grew and len(rm.rows) - state["rank"].rank >= extra:
                    continue
                x = FieldElement.make(K, list(key))
                rm.rows.append(Relation(PowerProduct.of(x), vec))
                if finished():
                    state["done"] = True
        return s.tests

    if threads <= 1:
        used = worker(0, budget)
    else:
        share = max(1, budget // threads)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            used = sum(ex.map(lambda w: worker(w, share), range(threads)))
        # canonical row order so downstream results do not depend on timing
        rm.rows.sort(key=lambda r: (tuple(sorted(r.exponents)),
                                    tuple(r.element.factors[0][0].coords) if r.element.factors else ()))
    del used
    if not finished():
        raise BudgetExhausted("relation search budget exhausted", partial=rm)
    return rm


__all__ = ["FactorBase", "Relation", "RelationMatrix", "build_factor_base",
           "smooth_factorize", "collect_relations", "verify_relation", "DEFAULT_BUDGET"]
