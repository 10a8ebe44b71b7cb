"""Unexpanded products of field elements."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import NegativeValuation, ZeroElement
from .field import DEFAULT_PREC, FieldElement
from .ideal import PrimeIdeal, ideal_valuation, p_unit_part
from .intervals import iv, precision


@dataclass(frozen=True)
class PowerProduct:
    """prod x_i ** e_i, kept as (element, exponent) pairs.

    Equal bases are merged and zero exponents dropped, so two power products
    with the same factors compare equal.
    """

    factors: tuple = ()

    @staticmethod
    def of(x: FieldElement, e: int = 1) -> "PowerProduct":
        return PowerProduct.make([(x, e)])

    @staticmethod
    def make(pairs) -> "PowerProduct":
        acc: dict = {}
        order = []
        for x, e in pairs:
            if e == 0:
                continue
            if x.is_zero():
                raise ZeroElement("zero factor in power product")
            if x not in acc:
                acc[x] = 0
                order.append(x)
            acc[x] += e
        return PowerProduct(tuple((x, acc[x]) for x in order if acc[x]))

    def __mul__(self, other: "PowerProduct") -> "PowerProduct":
        return PowerProduct.make(list(self.factors) + list(other.factors))

    def __pow__(self, k: int) -> "PowerProduct":
        return PowerProduct.make([(x, e * k) for x, e in self.factors])

    def inverse(self) -> "PowerProduct":
        return self ** -1

    def __len__(self):
        return len(self.factors)

    def is_empty(self):
        return not self.factors

    def max_exponent(self):
        return max((abs(e) for _, e in self.factors), default=0)

    def norm(self) -> Fraction:
        out = Fraction(1)
        for x, e in self.factors:
            out *= x.norm() ** e
        return out

    def valuation(self, P: PrimeIdeal) -> int:
        return sum(e * ideal_valuation(x, P) for x, e in self.factors)

    def log_abs(self, prec=DEFAULT_PREC, K=None):
        """Exponent-weighted sum of factor log-embeddings (intervals).

        An empty product needs ``K`` to know how many places there are.
        """
        out = None
        with precision(prec):
            for x, e in self.factors:
                v = x.log_abs(prec)
                if out is None:
                    out = [e * t for t in v]
                else:
                    out = [a + e * t for a, t in zip(out, v)]
        if out is None:
            if K is None:
                raise ValueError("empty product needs the field")
            with precision(prec):
                return [iv.mpf(0) for _ in range(K.r1 + K.r2)]
        return out

    def expand(self, K=None) -> FieldElement:
        if not self.factors:
            if K is None:
                raise ValueError("empty product needs the field")
            return K.one
        result = None
        for x, e in self.factors:
            t = x ** e
            result = t if result is None else result * t
        return result


def expand(pp: PowerProduct, K=None) -> FieldElement:
    return pp.expand(K)


def expand_mod(pp: PowerProduct, P: PrimeIdeal):
    """Value of pp in O_K/P, reducing every factor before exponentiating.

    Each integral factor x is replaced by z = x*(tau/p)^v, v = ord_P(x),
    with tau in p P^{-1} outside pO; z is integral and prime to P.  The
    discarded parts cancel exactly when the valuations net to zero.
    Denominators are split off as separate integer factors.
    """
    R = P.residue()
    K = P.K
    flat = []
    for x, e in pp.factors:
        if x.den != 1:
            flat.append((x.coords, e))
            flat.append(((x.den,) + (0,) * (K.n - 1), -e))
        else:
            flat.append((x.coords, e))
    net = 0
    value = R.one
    for coords, e in flat:
        v, z = p_unit_part(coords, P)
        net += v * e
        r = R.from_element(FieldElement.make(K, z))
        if e < 0:
            r = R.inv(r)
            e = -e
        value = R.mul(value, R.pow(r, e))
    if net < 0:
        raise NegativeValuation("power product has negative valuation at P")
    if net > 0:
        return 0 if R.vals is not None else tuple([0] * K.n)
    return value


__all__ = ["PowerProduct", "expand", "expand_mod"]
