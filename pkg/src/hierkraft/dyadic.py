"""Aligned dyadic intervals and exact dyadic amounts.

An aligned interval is identified with the bit string of its position:
``"01"`` is ``[1/4, 1/2)``, the empty string is the whole unit interval.
Containment of intervals is the prefix relation on strings.

Amounts (sizes, money, measures) are exact numbers ``m * 2**-e``.
Nothing here ever touches floating point.
"""

from __future__ import annotations

import enum
from fractions import Fraction

__all__ = [
    "DyadicAmount",
    "DyadicInterval",
    "LedgerUnderflow",
    "Relation",
    "make_interval",
    "split",
    "relation",
    "measure",
    "amount_arith",
]

_BITS = frozenset("01")


class LedgerUnderflow(ArithmeticError):
    """Subtraction would produce a negative amount."""


class DyadicAmount:
    """Non-negative dyadic rational ``mantissa * 2**-exponent``.

    Always kept canonical: the mantissa is odd, or the value is zero and
    stored as ``(0, 0)``.
    """

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if mantissa < 0 or exponent < 0:
            raise ValueError("mantissa and exponent must be non-negative")
        m, e = _normalize(int(mantissa), int(exponent))
        self.mantissa = m
        self.exponent = e

    @classmethod
    def _raw(cls, m: int, e: int) -> "DyadicAmount":
        obj = object.__new__(cls)
        obj.mantissa = m
        obj.exponent = e
        return obj

    @classmethod
    def pow2(cls, e: int) -> "DyadicAmount":
        """The amount ``2**-e``."""
        if e < _POW2_CACHE:
            if e < 0:
                raise ValueError("exponent must be non-negative")
            return _POW2[e]
        return cls._raw(1, e)

    @classmethod
    def sum_pow2(cls, exponents) -> "DyadicAmount":
        """Exact ``sum(2**-e for e in exponents)`` with one normalisation."""
        exps = list(exponents)
        if not exps:
            return cls._raw(0, 0)
        top = max(exps)
        return cls._raw(*_normalize(sum(1 << (top - e) for e in exps), top))

    @classmethod
    def zero(cls) -> "DyadicAmount":
        return cls._raw(0, 0)

    @classmethod
    def one(cls) -> "DyadicAmount":
        return cls._raw(1, 0)

    @classmethod
    def from_fraction(cls, q) -> "DyadicAmount":
        """Exact conversion; raises ValueError for non-dyadic or negative input."""
        q = Fraction(q)
        den = q.denominator
        if q < 0 or den & (den - 1):
            raise ValueError(f"{q} is not a non-negative dyadic rational")
        return cls(q.numerator, den.bit_length() - 1)

    @classmethod
    def parse(cls, text: str) -> "DyadicAmount":
        """Parse ``"5/16"``, ``"1"`` or ``"0"``."""
        return cls.from_fraction(Fraction(text.strip()))

    def to_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def is_zero(self) -> bool:
        return self.mantissa == 0

    def __add__(self, other: "DyadicAmount") -> "DyadicAmount":
        if not isinstance(other, DyadicAmount):
            return NotImplemented
        ma, ea, mb, eb = self.mantissa, self.exponent, other.mantissa, other.exponent
        if ea == eb:
            return DyadicAmount._raw(*_normalize(ma + mb, ea))
        if ea > eb:
            # odd + even: already canonical
            return DyadicAmount._raw(ma + (mb << (ea - eb)), ea)
        return DyadicAmount._raw((ma << (eb - ea)) + mb, eb)

    def __sub__(self, other: "DyadicAmount") -> "DyadicAmount":
        if not isinstance(other, DyadicAmount):
            return NotImplemented
        ma, ea, mb, eb = self.mantissa, self.exponent, other.mantissa, other.exponent
        e = max(ea, eb)
        m = (ma << (e - ea)) - (mb << (e - eb))
        if m < 0:
            raise LedgerUnderflow(f"{self} - {other} is negative")
        return DyadicAmount._raw(*_normalize(m, e))

    def _cmp(self, other: "DyadicAmount") -> int:
        ma, ea, mb, eb = self.mantissa, self.exponent, other.mantissa, other.exponent
        if ea != eb:
            e = max(ea, eb)
            ma <<= e - ea
            mb <<= e - eb
        return (ma > mb) - (ma < mb)

    def __eq__(self, other):
        if not isinstance(other, DyadicAmount):
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __hash__(self):
        return hash((self.mantissa, self.exponent))

    def __lt__(self, other):
        if not isinstance(other, DyadicAmount):
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if not isinstance(other, DyadicAmount):
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if not isinstance(other, DyadicAmount):
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if not isinstance(other, DyadicAmount):
            return NotImplemented
        return self._cmp(other) >= 0

    def __repr__(self):
        return f"DyadicAmount({self})"

    def __format__(self, spec):
        return format(str(self), spec)

    def __str__(self):
        if self.exponent == 0:
            return str(self.mantissa)
        return f"{self.mantissa}/{1 << self.exponent}"


_POW2_CACHE = 256
_POW2 = [DyadicAmount._raw(1, e) for e in range(_POW2_CACHE)]


def _normalize(m: int, e: int) -> tuple[int, int]:
    if m == 0:
        return 0, 0
    tz = (m & -m).bit_length() - 1
    shift = tz if tz < e else e
    return m >> shift, e - shift


class Relation(enum.Enum):
    EQUAL = "equal"
    A_CONTAINS_B = "a_contains_b"
    B_CONTAINS_A = "b_contains_a"
    DISJOINT = "disjoint"


class DyadicInterval:
    """Half-open aligned interval ``[0.bits, 0.bits + 2**-len(bits))``."""

    __slots__ = ("bits",)

    def __init__(self, bits: str = ""):
        if not _BITS.issuperset(bits):
            raise ValueError(f"malformed bit string {bits!r}")
        self.bits = bits

    @classmethod
    def _raw(cls, bits: str) -> "DyadicInterval":
        obj = object.__new__(cls)
        obj.bits = bits
        return obj

    @property
    def depth(self) -> int:
        return len(self.bits)

    @property
    def measure(self) -> DyadicAmount:
        return DyadicAmount.pow2(len(self.bits))

    @property
    def left(self) -> Fraction:
        if not self.bits:
            return Fraction(0)
        return Fraction(int(self.bits, 2), 1 << len(self.bits))

    @property
    def right(self) -> Fraction:
        return self.left + Fraction(1, 1 << len(self.bits))

    def split(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        b = self.bits
        return DyadicInterval._raw(b + "0"), DyadicInterval._raw(b + "1")

    def contains(self, other: "DyadicInterval") -> bool:
        """Non-strict containment."""
        return other.bits.startswith(self.bits)

    def disjoint(self, other: "DyadicInterval") -> bool:
        a, b = self.bits, other.bits
        return not (a.startswith(b) or b.startswith(a))

    def relation(self, other: "DyadicInterval") -> Relation:
        a, b = self.bits, other.bits
        if a == b:
            return Relation.EQUAL
        if b.startswith(a):
            return Relation.A_CONTAINS_B
        if a.startswith(b):
            return Relation.B_CONTAINS_A
        return Relation.DISJOINT

    def serialize(self) -> str:
        return self.bits or "-"

    @classmethod
    def parse(cls, token: str) -> "DyadicInterval":
        return cls("" if token == "-" else token)

    def __eq__(self, other):
        if not isinstance(other, DyadicInterval):
            return NotImplemented
        return self.bits == other.bits

    def __hash__(self):
        return hash(self.bits)

    def __lt__(self, other):
        return self.bits < other.bits

    def __repr__(self):
        return f"DyadicInterval({self.bits!r})"

    def __str__(self):
        return self.serialize()


UNIT = DyadicInterval._raw("")


def total_measure(intervals) -> DyadicAmount:
    return DyadicAmount.sum_pow2(len(iv.bits) for iv in intervals)


def make_interval(bits: str) -> DyadicInterval:
    return DyadicInterval(bits)


def split(iv: DyadicInterval) -> tuple[DyadicInterval, DyadicInterval]:
    return iv.split()


def relation(a: DyadicInterval, b: DyadicInterval) -> Relation:
    return a.relation(b)


def measure(iv: DyadicInterval) -> DyadicAmount:
    return iv.measure


def amount_arith(op: str, a: DyadicAmount, b: DyadicAmount):
    """Dispatch helper: ``add`` and ``sub`` return amounts, ``cmp`` returns -1/0/1."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "cmp":
        return a._cmp(b)
    raise ValueError(f"unknown op {op!r}")


def prefix_free(bit_strings) -> tuple[str, str] | None:
    """Return a comparable pair from ``bit_strings`` or None if prefix-free.

    After sorting, a string and any of its extensions are separated only by
    other extensions, so checking neighbours is enough.
    """
    ordered = sorted(bit_strings)
    for a, b in zip(ordered, ordered[1:]):
        if b.startswith(a):
            return a, b
    return None
