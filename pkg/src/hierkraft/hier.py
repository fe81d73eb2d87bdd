"""Hierarchical allocation: every request buys space from its father.

Each node starts with ``2**-label`` in cash, spends it on one interval of
exactly that size from its father and from then on resells pieces to its
sons.  Small requests are served from the free list (exact entry first,
otherwise split the smallest larger one).  When the free list cannot serve,
a request at least the node's own size is bought from the father and passed
straight through; a smaller one makes the node buy a fresh interval of its
own size and split it.  The root sells from the unit interval and is the
only place where space can run out.

Money is tracked literally so that the accounting identities can be
audited: for a non-root node ``free measure + money == 2**-label``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .contam import ContaminationSet, InsuranceLedger, buy_clean
from .dyadic import UNIT, DyadicAmount, DyadicInterval, prefix_free, total_measure
from .events import Alloc, Error, Event
from .kraft import FreeList, KraftViolation

__all__ = [
    "ROOT",
    "Node",
    "RequestTree",
    "AuditReport",
    "new_tree",
    "audit",
    "KraftViolation",
]

ROOT = 0

# Python frames consumed per tree level by a purchase climbing to the root.
_FRAMES_PER_LEVEL = 4


class Node:
    __slots__ = ("id", "label", "father", "depth", "free", "money", "owned", "children")

    def __init__(self, id: int, label: int, father: int | None, depth: int,
                 free: FreeList, money: DyadicAmount):
        self.id = id
        self.label = label
        self.father = father
        self.depth = depth
        self.free = free
        self.money = money
        self.owned: list[DyadicInterval] = []
        self.children: list[int] = []

    def copy(self) -> "Node":
        n = Node.__new__(Node)
        n.id, n.label, n.father, n.depth = self.id, self.label, self.father, self.depth
        n.free = self.free.copy()
        n.money = self.money
        n.owned = self.owned[:]
        n.children = self.children[:]
        return n

    def __repr__(self):
        return (f"Node(id={self.id}, label={self.label}, father={self.father}, "
                f"money={self.money}, free={self.free!r}, "
                f"owned={[iv.serialize() for iv in self.owned]})")


class RequestTree:
    """The growing request tree together with its money ledger and event log."""

    def __init__(self):
        self.nodes: list[Node] = [Node(ROOT, 0, None, 0, FreeList(UNIT), DyadicAmount.zero())]
        self.revenue = DyadicAmount.zero()
        self.endowments = DyadicAmount.zero()
        self.log: list[Event] = []
        self.contamination = ContaminationSet()
        self.insurance = InsuranceLedger()
        self.failed = False

    @property
    def root(self) -> Node:
        return self.nodes[ROOT]

    @property
    def payouts(self) -> DyadicAmount:
        return self.insurance.payouts

    def __len__(self):
        return len(self.nodes)

    def copy(self) -> "RequestTree":
        t = RequestTree.__new__(RequestTree)
        t.nodes = [n.copy() for n in self.nodes]
        t.revenue = self.revenue
        t.endowments = self.endowments
        t.log = list(self.log)
        t.contamination = ContaminationSet() if self.contamination.is_empty() else self.contamination.copy()
        t.insurance = self.insurance.copy()
        t.failed = self.failed
        return t

    def _next_seq(self) -> int:
        return len(self.log) + 1

    def _emit(self, event: Event) -> None:
        self.log.append(event)

    def _node(self, v: int) -> Node:
        if not isinstance(v, int) or not 0 <= v < len(self.nodes):
            raise KeyError(f"unknown node {v!r}")
        return self.nodes[v]

    def contaminate(self, iv: DyadicInterval | str) -> None:
        if isinstance(iv, str):
            iv = DyadicInterval(iv)
        self.contamination.contaminate(iv)

    def add_request(self, father: int, label: int) -> tuple[int, DyadicInterval]:
        """Attach a new request below ``father`` and buy its first interval.

        Returns the new node id and the interval of measure ``2**-label``
        it received.  After a KraftViolation the tree is left mid-purchase
        and refuses further requests.
        """
        if self.failed:
            raise RuntimeError("tree is unusable after a kraft violation")
        f = self._node(father)
        if not isinstance(label, int) or isinstance(label, bool) or label < 1:
            raise ValueError(f"label must be an integer >= 1, got {label!r}")
        price = DyadicAmount.pow2(label)
        v = Node(len(self.nodes), label, father, f.depth + 1, FreeList(), price)
        self.nodes.append(v)
        f.children.append(v.id)
        self.endowments = self.endowments + price
        _ensure_stack(v.depth)
        try:
            x = self._purchase(v.id, label)
        except KraftViolation:
            self.failed = True
            self._emit(Error("kraft_violation", self._next_seq()))
            raise
        v.free.insert(x)
        return v.id, x

    def _purchase(self, buyer: int, e: int) -> DyadicInterval:
        x = buy_clean(self, buyer, e, self.contamination, self.insurance)
        self.nodes[buyer].owned.append(x)
        self._emit(Alloc(buyer, x, self._next_seq()))
        return x

    def sell(self, v: int, e: int) -> DyadicInterval:
        """Node ``v`` serves a son's request for ``2**-e`` and takes the payment.

        The buyer's side of the payment is handled by the caller.
        """
        node = self.nodes[v]
        price = DyadicAmount.pow2(e)
        free = node.free
        if free.can_serve(e):
            x = free.allocate(e)
            if v == ROOT:
                self.revenue = self.revenue + price
            else:
                node.money = node.money + price
            return x
        if v == ROOT:
            raise KraftViolation(e, free.free_measure)
        node.money = node.money + price
        if e <= node.label:
            # pass-through: bought and resold at once, never enters the free list
            return self._purchase(v, e)
        # restock: every free entry is smaller than the request
        w = self._purchase(v, node.label)
        free.insert(w)
        return free.allocate(e)

    def owned(self, v: int) -> list[DyadicInterval]:
        if v == ROOT:
            return [UNIT]
        return list(self._node(v).owned)

    def labels(self) -> list[int]:
        return [n.label for n in self.nodes]

    def audit(self) -> "AuditReport":
        return audit(self)


def new_tree() -> RequestTree:
    return RequestTree()


def _ensure_stack(depth: int) -> None:
    need = depth * _FRAMES_PER_LEVEL + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


@dataclass
class CheckResult:
    name: str
    ok: bool = True
    detail: str = ""

    def fail(self, detail: str) -> None:
        if self.ok:
            self.ok = False
            self.detail = detail

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f" {self.detail}" if self.detail else "")


@dataclass
class AuditReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def __str__(self):
        return "\n".join(c.line() for c in self.checks)


AUDIT_CHECKS = (
    "ledger",
    "min_size",
    "father_containment",
    "sibling_disjoint",
    "root_balance",
    "cash_conservation",
    "free_lists",
    "insurance",
)


def audit(t: RequestTree) -> AuditReport:
    """Recompute every structural and accounting invariant from scratch.

    Each failing check carries its first counterexample.
    """
    checks = {name: CheckResult(name) for name in AUDIT_CHECKS}
    nodes = t.nodes
    money_total = DyadicAmount.zero()

    for v in nodes:
        free_total = total_measure(v.free.entries.values())
        if v.id == ROOT:
            if free_total + t.revenue != DyadicAmount.one():
                checks["root_balance"].fail(f"root free {free_total} + revenue {t.revenue} != 1")
            if not v.money.is_zero():
                checks["ledger"].fail(f"root holds money {v.money}")
        else:
            money_total = money_total + v.money
            if free_total + v.money != DyadicAmount.pow2(v.label):
                checks["ledger"].fail(
                    f"node {v.id}: free {free_total} + money {v.money} != 2^-{v.label}")
            if not v.owned:
                checks["min_size"].fail(f"node {v.id} owns nothing")
            elif v.owned[0].depth != v.label:
                checks["min_size"].fail(f"node {v.id}: first interval {v.owned[0]} is not of size 2^-{v.label}")
            for iv in v.owned:
                if iv.depth > v.label:
                    checks["min_size"].fail(f"node {v.id}: {iv} smaller than 2^-{v.label}")
            father_space = t.owned(v.father)
            for iv in v.owned:
                if not any(f.contains(iv) for f in father_space):
                    checks["father_containment"].fail(f"node {v.id}: {iv} outside father {v.father}")

        problems = v.free.check()
        if problems:
            checks["free_lists"].fail(f"node {v.id}: {problems[0]}")
        space = t.owned(v.id)
        for iv in v.free.entries.values():
            if not any(o.contains(iv) for o in space):
                checks["free_lists"].fail(f"node {v.id}: free {iv} outside its own space")

        sold = [iv.bits for c in v.children for iv in nodes[c].owned]
        clash = prefix_free(sold)
        if clash:
            checks["sibling_disjoint"].fail(f"sons of {v.id}: {clash[0] or '-'} and {clash[1]} overlap")
        clash = prefix_free(sold + [iv.bits for iv in v.free.entries.values()])
        if clash and checks["sibling_disjoint"].ok:
            checks["free_lists"].fail(f"node {v.id}: free space overlaps sold space ({clash[0] or '-'}, {clash[1]})")

    if money_total + t.revenue != t.endowments + t.payouts:
        checks["cash_conservation"].fail(
            f"money {money_total} + revenue {t.revenue} != endowments {t.endowments} + payouts {t.payouts}")

    led = t.insurance
    burned_total = total_measure(led.burned)
    if burned_total != led.payouts:
        checks["insurance"].fail(f"payouts {led.payouts} != burned measure {burned_total}")
    clash = prefix_free(iv.bits for iv in led.burned)
    if clash:
        checks["insurance"].fail(f"burned intervals {clash[0] or '-'} and {clash[1]} overlap")
    if led.payouts > t.contamination.measure:
        checks["insurance"].fail(f"payouts {led.payouts} exceed contamination {t.contamination.measure}")
    for iv in led.burned:
        if not t.contamination.fully_contaminated(iv):
            checks["insurance"].fail(f"burned {iv} is not contaminated")

    return AuditReport(list(checks.values()))
