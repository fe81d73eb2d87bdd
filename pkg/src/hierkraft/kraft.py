"""Online Kraft-Chaitin allocation.

Free space is a set of disjoint aligned intervals, at most one per size.
A request for ``2**-e`` takes the exact-size entry if there is one,
otherwise the smallest larger entry is split down the left side and every
right half goes back into the free list.
"""

from __future__ import annotations

from .dyadic import UNIT, DyadicAmount, DyadicInterval, prefix_free, total_measure

__all__ = ["FreeList", "KraftViolation", "new_allocator", "allocate_sequence"]


class KraftViolation(Exception):
    """No free entry of measure at least ``2**-exponent`` remains."""

    def __init__(self, exponent: int, free: DyadicAmount):
        super().__init__(f"no free interval of size >= 2^-{exponent} (free measure {free})")
        self.exponent = exponent
        self.free = free


class FreeList:
    """Disjoint aligned intervals of pairwise distinct sizes.

    ``entries`` maps a size exponent ``e`` to the single free interval of
    measure ``2**-e``.
    """

    __slots__ = ("entries", "_measure")

    def __init__(self, root: DyadicInterval | None = None):
        self.entries: dict[int, DyadicInterval] = {}
        self._measure = DyadicAmount.zero()
        if root is not None:
            self.insert(root)

    @property
    def free_measure(self) -> DyadicAmount:
        return self._measure

    def copy(self) -> "FreeList":
        fl = FreeList.__new__(FreeList)
        fl.entries = dict(self.entries)
        fl._measure = self._measure
        return fl

    def intervals(self) -> list[DyadicInterval]:
        """Entries, largest first."""
        return [self.entries[k] for k in sorted(self.entries)]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.intervals())

    def can_serve(self, e: int) -> bool:
        for k in self.entries:
            if k <= e:
                return True
        return False

    def insert(self, iv: DyadicInterval) -> None:
        k = iv.depth
        if k in self.entries:
            raise ValueError(f"free list already holds an interval of size 2^-{k}")
        self.entries[k] = iv
        self._measure = self._measure + iv.measure

    def allocate(self, e: int) -> DyadicInterval:
        if e < 0:
            raise ValueError("size exponent must be non-negative")
        entries = self.entries
        iv = entries.pop(e, None)
        if iv is None:
            larger = [k for k in entries if k < e]
            if not larger:
                raise KraftViolation(e, self._measure)
            k = max(larger)
            iv = entries.pop(k)
            bits = iv.bits
            # descend left; each right sibling fills the (empty) slot one size down
            for depth in range(k + 1, e + 1):
                entries[depth] = DyadicInterval._raw(bits + "1")
                bits += "0"
            iv = DyadicInterval._raw(bits)
        self._measure = self._measure - DyadicAmount.pow2(e)
        return iv

    def check(self) -> list[str]:
        """Problems with the free-list invariants (empty when healthy)."""
        problems = []
        entries = self.entries
        if not entries:
            if not self._measure.is_zero():
                problems.append(f"cached free measure {self._measure} != recomputed 0")
            return problems
        for k, iv in entries.items():
            if len(iv.bits) != k:
                problems.append(f"entry {iv} filed under size 2^-{k}")
        # compare in integer units of the smallest entry
        top = max(entries)
        m, e = self._measure.mantissa, self._measure.exponent
        if e > top or sum(1 << (top - k) for k in entries) != m << (top - e):
            problems.append(f"cached free measure {self._measure} != recomputed "
                            f"{total_measure(entries.values())}")
        if len(entries) == 1:
            return problems
        clash = prefix_free(iv.bits for iv in entries.values())
        if clash:
            problems.append(f"free entries {clash[0] or '-'} and {clash[1]} overlap")
        return problems

    def __repr__(self):
        return "FreeList([" + ", ".join(repr(iv.serialize()) for iv in self.intervals()) + "])"


def new_allocator(root: DyadicInterval = UNIT) -> FreeList:
    return FreeList(root)


def allocate_sequence(labels, root: DyadicInterval = UNIT) -> list[DyadicInterval]:
    """Serve ``labels`` in order on a fresh allocator; raises on the first violation."""
    fl = FreeList(root)
    return [fl.allocate(l) for l in labels]
