"""Contaminated space and the insurance wrapper around father purchases.

The contaminated region only grows. A purchase whose interval lies entirely
inside the region known at that moment is burned: the seller keeps the
payment, the insurer refunds the buyer, the interval is retired for good,
and the buyer tries again.
"""

from __future__ import annotations

from .dyadic import DyadicAmount, DyadicInterval
from .events import Burn

__all__ = ["ContaminationSet", "InsuranceLedger", "buy_clean"]


class _TrieNode:
    __slots__ = ("covered", "kids")

    def __init__(self):
        self.covered = False
        self.kids: list[_TrieNode | None] = [None, None]


class ContaminationSet:
    """Union of aligned intervals stored as a canonical binary trie.

    Canonical means a covered node has no covered ancestor and never two
    covered children, so an interval is fully covered exactly when some
    node on its path is marked.
    """

    def __init__(self, intervals=()):
        self._root = _TrieNode()
        self._measure = DyadicAmount.zero()
        for iv in intervals:
            self.contaminate(iv)

    @property
    def measure(self) -> DyadicAmount:
        return self._measure

    def is_empty(self) -> bool:
        return self._measure.is_zero()

    def contaminate(self, iv: DyadicInterval) -> None:
        path = [self._root]
        node = self._root
        for ch in iv.bits:
            if node.covered:
                return
            b = ch == "1"
            nxt = node.kids[b]
            if nxt is None:
                nxt = node.kids[b] = _TrieNode()
            node = nxt
            path.append(node)
        if node.covered:
            return
        absorbed = _covered_measure(node, iv.depth)
        node.covered = True
        node.kids = [None, None]
        self._measure = self._measure - absorbed + iv.measure
        # merge upward while both halves are covered
        for depth in range(len(path) - 1, 0, -1):
            parent = path[depth - 1]
            a, b = parent.kids
            if a is not None and b is not None and a.covered and b.covered:
                parent.covered = True
                parent.kids = [None, None]
            else:
                break

    def fully_contaminated(self, iv: DyadicInterval) -> bool:
        node = self._root
        if node.covered:
            return True
        for ch in iv.bits:
            node = node.kids[ch == "1"]
            if node is None:
                return False
            if node.covered:
                return True
        return False

    def covered_within(self, iv: DyadicInterval) -> DyadicAmount:
        """Measure of the contaminated part of ``iv``."""
        node = self._root
        for ch in iv.bits:
            if node.covered:
                return iv.measure
            node = node.kids[ch == "1"]
            if node is None:
                return DyadicAmount.zero()
        return _covered_measure(node, iv.depth)

    def covered(self) -> list[DyadicInterval]:
        """The canonical covering intervals in lexicographic order."""
        out: list[DyadicInterval] = []
        stack = [(self._root, "")]
        while stack:
            node, bits = stack.pop()
            if node.covered:
                out.append(DyadicInterval._raw(bits))
                continue
            for b in (1, 0):
                kid = node.kids[b]
                if kid is not None:
                    stack.append((kid, bits + "01"[b]))
        return out

    def copy(self) -> "ContaminationSet":
        return ContaminationSet(self.covered())

    def __repr__(self):
        return f"ContaminationSet({[iv.serialize() for iv in self.covered()]})"


def _covered_measure(node: _TrieNode, depth: int) -> DyadicAmount:
    total = DyadicAmount.zero()
    stack = [(node, depth)]
    while stack:
        n, d = stack.pop()
        if n.covered:
            total = total + DyadicAmount.pow2(d)
            continue
        for kid in n.kids:
            if kid is not None:
                stack.append((kid, d + 1))
    return total


class InsuranceLedger:
    """Intervals burned at purchase time and the total refunded for them."""

    def __init__(self):
        self.burned: list[DyadicInterval] = []
        self.payouts = DyadicAmount.zero()

    def record(self, iv: DyadicInterval) -> None:
        self.burned.append(iv)
        self.payouts = self.payouts + iv.measure

    def copy(self) -> "InsuranceLedger":
        led = InsuranceLedger()
        led.burned = list(self.burned)
        led.payouts = self.payouts
        return led


def buy_clean(t, buyer: int, e: int, c: ContaminationSet, led: InsuranceLedger) -> DyadicInterval:
    """Buy an interval of size ``2**-e`` for ``buyer`` from its father.

    Retries until the father hands over something not fully inside ``c``.
    Each retry burns a different interval of the same size inside the
    contaminated region, so the loop is finite.
    """
    node = t.nodes[buyer]
    price = DyadicAmount.pow2(e)
    while True:
        x = t.sell(node.father, e)
        node.money = node.money - price
        if c.is_empty() or not c.fully_contaminated(x):
            return x
        t._emit(Burn(x, t._next_seq()))
        led.record(x)
        node.money = node.money + price
