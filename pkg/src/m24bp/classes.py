"""Cycle-shape table for the degree-24 permutation classes and its combinatorics.

A cycle shape is a tuple of (cycle_length, exponent) pairs with exponents
positive and lengths strictly increasing.  Each record also carries the
element order (largest cycle length) and the level (order times smallest
cycle length), which is the level of the associated eta product.
"""
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import tomli
from gmpy2 import mpq
from sympy import divisors, gcd, mobius

from .blocks import EtaQuotient

Shape = tuple  # tuple of (k, b_k) pairs


@dataclass(frozen=True)
class ClassRecord:
    name: str
    shape: Shape
    order: int
    level: int

    @property
    def trace(self) -> int:
        """Number of fixed points (exponent of the 1-cycles)."""
        return dict(self.shape).get(1, 0)


def _normalize_shape(pairs) -> Shape:
    merged = {}
    for k, b in pairs:
        merged[k] = merged.get(k, 0) + b
    return tuple(sorted((k, b) for k, b in merged.items() if b != 0))


@lru_cache(maxsize=None)
def class_table() -> dict:
    """All 21 records keyed by name, in table order."""
    with resources.files("m24bp.data").joinpath("classes.toml").open("rb") as fh:
        raw = tomli.load(fh)
    table = {}
    for name, rec in raw["classes"].items():
        shape = _normalize_shape(tuple(map(tuple, rec["shape"])))
        record = ClassRecord(name, shape, rec["order"], rec["level"])
        assert sum(k * b for k, b in shape) == 24, name
        assert record.order == max(k for k, _ in shape), name
        assert record.level == record.order * min(k for k, _ in shape), name
        table[name] = record
    assert len(table) == 21
    return table


def get_class(name: str) -> ClassRecord:
    return class_table()[name]


def power_shape(shape: Shape, d: int) -> Shape:
    """Cycle shape of g^d: each k-cycle splits into gcd(k,d) cycles of
    length k/gcd(k,d)."""
    assert d >= 1
    return _normalize_shape(
        (k // int(gcd(k, d)), int(gcd(k, d)) * b) for k, b in shape
    )


def chi_power(shape: Shape, d: int) -> int:
    """Fixed-point count of g^d: sum of k*b_k over cycle lengths k dividing d."""
    return sum(k * b for k, b in shape if d % k == 0)


def exponents_from_traces(traces: dict) -> Shape:
    """Invert chi_power: recover the cycle shape from the fixed-point counts
    of all powers.  `traces` maps each divisor d of the order to chi(g^d)."""
    order = max(traces)
    shape = []
    for m in divisors(order):
        total = sum(int(mobius(m // d)) * traces[d] for d in divisors(m))
        if total % m != 0:
            raise ValueError(f"inconsistent traces at cycle length {m}")
        if total:
            shape.append((m, total // m))
    return _normalize_shape(shape)


def shape_level(shape: Shape) -> int:
    return max(k for k, _ in shape) * min(k for k, _ in shape)


@lru_cache(maxsize=None)
def _shape_index() -> dict:
    return {rec.shape: rec for rec in class_table().values()}


def class_of_power(rec: ClassRecord, d: int) -> ClassRecord:
    """The record whose shape is that of g^d (the table is power-closed)."""
    return _shape_index()[power_shape(rec.shape, d)]


def eta_product(rec: ClassRecord) -> EtaQuotient:
    """The weight sum(b_k)/2 eta product attached to the cycle shape."""
    return EtaQuotient(rec.shape)


def weight_kg(rec: ClassRecord):
    """Weight of the lifted form: half the number of cycles, minus 2."""
    return mpq(sum(b for _, b in rec.shape), 2) - 2
