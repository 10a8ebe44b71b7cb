"""Exact arithmetic in number fields: elements, ideals, primes, embeddings."""

from .field import (
    DEFAULT_PREC, FieldElement, NumberField, build_field, element_mul,
    element_norm, t2_norm,
)
from .ideal import (
    Ideal, PrimeIdeal, ResidueField, ideal_mul, ideal_norm, ideal_valuation,
    prime_decompose,
)
from .powerprod import PowerProduct, expand, expand_mod

__all__ = [
    "DEFAULT_PREC", "FieldElement", "NumberField", "build_field", "element_mul",
    "element_norm", "t2_norm", "Ideal", "PrimeIdeal", "ResidueField", "ideal_mul",
    "ideal_norm", "ideal_valuation", "prime_decompose", "PowerProduct", "expand",
    "expand_mod",
]
