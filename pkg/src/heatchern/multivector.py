"""Bigraded exterior algebra Lambda(n) (x) Lambda(n).

Basis words are pairs of n-bit masks: bit i-1 of the first mask means the
factor e^i, bit i-1 of the second mask the factor ehat^i, always written
with strictly increasing indices.  The tensor product is the graded one,
so ehat-factors anticommute with e-factors of odd degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .scalars import backend_of, join_backend

__all__ = [
    "Multivector", "BigradeSplit", "basis_e", "basis_ehat", "volume",
    "wedge", "grade_component", "berezin", "exp_even",
]


def _popcount(m: int) -> int:
    return bin(m).count("1")


def _wedge_sign(a: int, b: int) -> int:
    """Sign of sorting the concatenation of increasing words a, b (disjoint)."""
    swaps = 0
    a >>= 1
    while a:
        swaps += _popcount(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


def _mask_indices(m: int):
    i = 1
    while m:
        if m & 1:
            yield i
        m >>= 1
        i += 1


class Multivector:
    """Element of Lambda(n) (x) Lambda(n) with sparse canonical terms."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        full = (1 << n) - 1
        clean = {}
        for (s, t), c in (terms or {}).items():
            if s & ~full or t & ~full:
                raise ValueError(f"index mask out of range for n={n}")
            if c == 0:
                continue
            clean[(s, t)] = c
        self.terms = clean

    # -- constructors -------------------------------------------------

    @classmethod
    def scalar(cls, n: int, value) -> "Multivector":
        return cls(n, {(0, 0): value})

    @classmethod
    def zero(cls, n: int) -> "Multivector":
        return cls(n, {})

    # -- basic queries -------------------------------------------------

    def backend(self):
        return backend_of(self.terms.values())

    def coefficient(self, s: int, t: int):
        return self.terms.get((s, t), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self):
        """Set of total degrees present."""
        return {_popcount(s) + _popcount(t) for s, t in self.terms}

    def __eq__(self, other):
        if isinstance(other, Multivector):
            return self.n == other.n and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    # -- linear structure ----------------------------------------------

    def _check(self, other: "Multivector"):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} != {other.n}")
        join_backend(self.backend(), other.backend())

    def __add__(self, other: "Multivector") -> "Multivector":
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return Multivector(self.n, terms)

    def __neg__(self) -> "Multivector":
        return Multivector(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "Multivector") -> "Multivector":
        return self + (-other)

    def scale(self, factor) -> "Multivector":
        return Multivector(self.n, {k: factor * c for k, c in self.terms.items()})

    # -- product ---------------------------------------------------------

    def __xor__(self, other: "Multivector") -> "Multivector":
        return wedge(self, other)

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        """Canonical text form ``coef * e{i,..} ^ ehat{j,..}`` for golden tests."""
        if not self.terms:
            return "0"
        parts = []
        for (s, t) in sorted(self.terms):
            c = self.terms[(s, t)]
            factors = []
            if s:
                factors.append("e{%s}" % ",".join(str(i) for i in _mask_indices(s)))
            if t:
                factors.append("ehat{%s}" % ",".join(str(i) for i in _mask_indices(t)))
            word = " ^ ".join(factors) if factors else "1"
            parts.append(f"{c} * {word}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Multivector(n={self.n}, {self.to_text()})"


@dataclass(frozen=True)
class BigradeSplit:
    """Tangent/normal split: indices 1..a tangent, a+1..n normal."""

    n: int
    a: int

    def __post_init__(self):
        if not (0 <= self.a <= self.n):
            raise ValueError(f"invalid split a={self.a} for n={self.n}")

    @property
    def b(self) -> int:
        return self.n - self.a

    @property
    def tangent_mask(self) -> int:
        return (1 << self.a) - 1

    @property
    def normal_mask(self) -> int:
        return ((1 << self.n) - 1) ^ self.tangent_mask

    def selectors(self):
        """All bigrade selectors ((k1,l1),(k2,l2))."""
        for k1 in range(self.a + 1):
            for l1 in range(self.b + 1):
                for k2 in range(self.a + 1):
                    for l2 in range(self.b + 1):
                        yield ((k1, l1), (k2, l2))


def basis_e(n: int, *indices: int) -> Multivector:
    """e^{i_1} ^ ... with strictly increasing indices, 1-based."""
    mask = 0
    for i in indices:
        if not 1 <= i <= n:
            raise ValueError(f"index {i} out of range")
        mask |= 1 << (i - 1)
    if _popcount(mask) != len(indices):
        return Multivector.zero(n)
    return Multivector(n, {(mask, 0): 1})


def basis_ehat(n: int, *indices: int) -> Multivector:
    mask = 0
    for i in indices:
        if not 1 <= i <= n:
            raise ValueError(f"index {i} out of range")
        mask |= 1 << (i - 1)
    if _popcount(mask) != len(indices):
        return Multivector.zero(n)
    return Multivector(n, {(0, mask): 1})


def volume(n: int) -> Multivector:
    """omega = e^1 ^ ... ^ e^n ^ ehat^1 ^ ... ^ ehat^n."""
    full = (1 << n) - 1
    return Multivector(n, {(full, full): 1})


def wedge(x: Multivector, y: Multivector) -> Multivector:
    x._check(y)
    terms = {}
    for (s1, t1), c1 in x.terms.items():
        d1 = _popcount(t1)
        for (s2, t2), c2 in y.terms.items():
            if s1 & s2 or t1 & t2:
                continue
            sign = _wedge_sign(s1, s2) * _wedge_sign(t1, t2)
            # graded tensor product: move ehat-word of x past e-word of y
            if (d1 * _popcount(s2)) & 1:
                sign = -sign
            key = (s1 | s2, t1 | t2)
            terms[key] = terms.get(key, 0) + sign * c1 * c2
    return Multivector(x.n, terms)


def grade_component(x: Multivector, split: BigradeSplit, selector) -> Multivector:
    """Projection onto Lambda^{k1,l1} (x) Lambda^{k2,l2}."""
    (k1, l1), (k2, l2) = selector
    if not (0 <= k1 <= split.a and 0 <= k2 <= split.a
            and 0 <= l1 <= split.b and 0 <= l2 <= split.b):
        raise ValueError(f"invalid selector {selector} for split {split}")
    if split.n != x.n:
        raise ValueError("split dimension mismatch")
    tan, nor = split.tangent_mask, split.normal_mask
    terms = {}
    for (s, t), c in x.terms.items():
        if (_popcount(s & tan) == k1 and _popcount(s & nor) == l1
                and _popcount(t & tan) == k2 and _popcount(t & nor) == l2):
            terms[(s, t)] = c
    return Multivector(x.n, terms)


def berezin(x: Multivector, split: BigradeSplit | None = None, mode: str = "full"):
    """Berezin functionals.

    mode="full": the coefficient of the volume element omega (Berezin trace T).
    mode="tangent": the coefficient of e^1..e^a ^ ehat^1..ehat^a inside the
    ((*,0),(*,0)) component, i.e. |x|^{((a,0),(a,0))}.
    """
    if mode == "full":
        full = (1 << x.n) - 1
        return x.coefficient(full, full)
    if mode == "tangent":
        if split is None:
            raise ValueError("tangent-restricted Berezin integral needs a split")
        tan = split.tangent_mask
        return x.coefficient(tan, tan)
    raise ValueError(f"unknown mode {mode!r}")


def exp_even(x: Multivector) -> Multivector:
    """exp of a nilpotent element with only positive even total degree."""
    for deg in x.degrees():
        if deg == 0 or deg % 2:
            raise ValueError("exp_even input must have positive even degree only")
    result = Multivector.scalar(x.n, 1)
    power = result
    k = 0
    while True:
        power = wedge(power, x)
        if power.is_zero():
            return result
        k += 1
        result = result + power.scale(Fraction(1, factorial(k)))
