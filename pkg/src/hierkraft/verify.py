"""Independent checks: log replay, exhaustive feasibility, random streams.

Nothing here trusts the allocator's own bookkeeping.  The replay model
rebuilds every node's unsold space and cash balance from the event log alone
and compares the result with a live tree only at the end.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .contam import ContaminationSet
from .dyadic import DyadicAmount, DyadicInterval, prefix_free
from .events import Alloc, Burn, Error
from .hier import ROOT, AuditReport, CheckResult, RequestTree, audit
from .kraft import FreeList, KraftViolation, allocate_sequence
from .stream import Contam, Req, format_log, format_stream, run_stream

__all__ = [
    "StreamSpec",
    "random_stream",
    "brute_force_feasible",
    "CapacityError",
    "LogChecker",
    "StepAuditor",
    "replay_audit",
    "kraft_chaitin_equiv",
    "first_kraft_overflow",
    "exhaustive_agreement",
    "AgreementSummary",
    "check_delayed_read",
]


# ---------------------------------------------------------------- streams

@dataclass(frozen=True)
class StreamSpec:
    seed: int
    nodes: int = 50
    max_label: int = 16
    hier_prob: float = 0.5
    # share of the unit budget reserved for contamination
    contam_frac: Fraction = Fraction(0)
    # smallest label the generator will pick unless the budget forces larger
    min_label: int = 1

    def header(self) -> str:
        return (f"generator: python random.Random (MT19937) seed={self.seed}\n"
                f"nodes={self.nodes} max_label={self.max_label} hier_prob={self.hier_prob} "
                f"contam_frac={self.contam_frac} min_label={self.min_label}")


def _smallest_fitting_label(remaining: DyadicAmount) -> int | None:
    if remaining.is_zero():
        return None
    return max(1, remaining.exponent - (remaining.mantissa.bit_length() - 1))


def _dyadic_floor(frac, bits: int = 32) -> DyadicAmount:
    q = Fraction(frac)
    if not 0 <= q <= 1:
        raise ValueError("contamination fraction must lie in [0, 1]")
    return DyadicAmount(int(q * (1 << bits)), bits)


def random_stream(spec: StreamSpec) -> list:
    """Seeded stream with ``endowments + contamination measure <= 1`` throughout.

    Requests draw from the share ``1 - contam_frac``; contamination lines
    draw from ``contam_frac``.  Picks that would overflow are redrawn from
    the labels that still fit; the stream ends early once none does.
    """
    rng = random.Random(spec.seed)
    contam_budget = _dyadic_floor(spec.contam_frac)
    req_budget = DyadicAmount.one() - contam_budget
    cset = ContaminationSet()
    endow = DyadicAmount.zero()
    out: list = []
    ids = 0
    contam_depth = max(1, min(spec.max_label, 10))
    while ids < spec.nodes:
        if not contam_budget.is_zero() and rng.random() < 0.3:
            for _ in range(4):
                d = rng.randint(1, contam_depth)
                iv = DyadicInterval(format(rng.getrandbits(d), f"0{d}b"))
                grown = cset.measure + iv.measure - cset.covered_within(iv)
                if grown <= contam_budget:
                    cset.contaminate(iv)
                    out.append(Contam(iv))
                    break
        lo = _smallest_fitting_label(req_budget - endow)
        if lo is None or lo > spec.max_label:
            break
        label = rng.randint(max(spec.min_label, 1), spec.max_label)
        if label < lo:
            label = rng.randint(lo, spec.max_label)
        parent = rng.randint(1, ids) if ids and rng.random() < spec.hier_prob else ROOT
        ids += 1
        endow = endow + DyadicAmount.pow2(label)
        out.append(Req(ids, parent, label))
    return out


def random_stream_text(spec: StreamSpec) -> str:
    return format_stream(random_stream(spec), header=spec.header())


# ----------------------------------------------------- brute-force oracle

class CapacityError(ValueError):
    pass


def _shape_key(children, labels, v):
    return (labels[v], tuple(sorted(_shape_key(children, labels, c) for c in children[v])))


_feasible_memo: dict = {}


def brute_force_feasible(requests, depth_cap: int = 6) -> bool:
    """Exhaustively look for one interval of measure exactly ``2**-label`` per request.

    ``requests`` is a list of ``(parent, label)`` where parent 0 is the root
    and parent ``i`` is the i-th request (1-based).  Sons must sit inside
    their father's interval and brothers must be disjoint.  Identical
    brothers are placed in increasing order, which prunes only mirror
    images of assignments already tried.
    """
    if len(requests) > 6:
        raise CapacityError("at most 6 requests")
    if depth_cap > 6:
        raise CapacityError("depth cap at most 6")
    n = len(requests)
    labels = [0] + [l for _, l in requests]
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for i, (p, l) in enumerate(requests, 1):
        if not 0 <= p < i:
            raise ValueError(f"request {i}: parent {p} is not an earlier request")
        if l > 4:
            raise CapacityError("labels at most 4")
        if l < 1:
            raise ValueError("labels must be >= 1")
        children[p].append(i)
    if any(l > depth_cap for l in labels):
        return False
    # a son larger than its father has nowhere to go
    if any(l < labels[p] for p, l in requests):
        return False
    key = _shape_key(children, labels, ROOT)
    hit = _feasible_memo.get(key)
    if hit is not None:
        return hit

    keys = {v: _shape_key(children, labels, v) for v in range(n + 1)}
    order: list[int] = []
    twin_before: dict[int, int] = {}

    def walk(v):
        sons = sorted(children[v], key=lambda c: keys[c])
        for a, b in zip(sons, sons[1:]):
            if keys[a] == keys[b]:
                twin_before[b] = a
        for c in sons:
            order.append(c)
            walk(c)

    walk(ROOT)
    father = [0] + [p for p, _ in requests]
    assigned = {ROOT: ""}

    def place(k):
        if k == len(order):
            return True
        v = order[k]
        base = assigned[father[v]]
        free_bits = labels[v] - len(base)
        if free_bits < 0:
            return False
        brothers = [assigned[c] for c in children[father[v]] if c in assigned]
        floor = assigned.get(twin_before.get(v, -1))
        for i in range(1 << free_bits):
            bits = base + (format(i, f"0{free_bits}b") if free_bits else "")
            if floor is not None and bits <= floor:
                continue
            if any(bits.startswith(b) or b.startswith(bits) for b in brothers):
                continue
            assigned[v] = bits
            if place(k + 1):
                del assigned[v]
                return True
            del assigned[v]
        return False

    result = place(0)
    _feasible_memo[key] = result
    return result


# ---------------------------------------------------------------- replay

class _Space:
    """Unsold space of one node as a set of disjoint aligned bit strings.

    ``registry`` maps every piece of every node to its holder; all spaces
    are disjoint, so a piece has exactly one.
    """

    __slots__ = ("pieces", "owner", "registry")

    def __init__(self, owner: int, registry: dict[str, int]):
        self.pieces: set[str] = set()
        self.owner = owner
        self.registry = registry

    def add(self, bits: str) -> None:
        self.pieces.add(bits)
        self.registry[bits] = self.owner

    def holder_of(self, bits: str) -> str | None:
        pieces = self.pieces
        for i in range(len(bits) + 1):
            if bits[:i] in pieces:
                return bits[:i]
        return None

    def remove(self, bits: str) -> bool:
        """Cut ``bits`` out of the space, keeping the leftover siblings."""
        a = self.holder_of(bits)
        if a is None:
            return False
        self.pieces.discard(a)
        del self.registry[a]
        for i in range(len(a), len(bits)):
            self.add(bits[:i] + ("1" if bits[i] == "0" else "0"))
        return True

    def measure(self) -> DyadicAmount:
        return DyadicAmount.sum_pow2(len(p) for p in self.pieces)


_CHECKS = (
    "lockstep",
    "first_alloc",
    "min_size",
    "father_containment",
    "sibling_disjoint",
    "clean_at_allocation",
    "burns",
    "ledger",
)


class LogChecker:
    """Consumes events one at a time and re-derives the allocator state.

    Labels and fathers come from the caller (the request stream); everything
    else is rebuilt from the log: each node's unsold space, the cash it has
    received and paid, the burned intervals and the contamination picture.
    """

    def __init__(self):
        self.labels: dict[int, int] = {ROOT: 0}
        self.father: dict[int, int] = {}
        self.registry: dict[str, int] = {}
        self.space: dict[int, _Space] = {ROOT: _Space(ROOT, self.registry)}
        self.space[ROOT].add("")
        # signed balances in integer units of 2**-scale
        self.scale = 64
        self.money: dict[int, int] = {}
        self.revenue = 0
        self.owned: dict[int, list[str]] = {}
        self.claimed: dict[int, set[str]] = {}
        self.claimed_prefixes: dict[int, set[str]] = {}
        self.contamination = ContaminationSet()
        self.burned: list[str] = []
        self.payouts = DyadicAmount.zero()
        self.last_seq = 0
        self.checks = {name: CheckResult(name) for name in _CHECKS}
        self.touched: set[int] = set()

    def add_node(self, v: int, father: int, label: int) -> None:
        self.labels[v] = label
        self.father[v] = father
        self.space[v] = _Space(v, self.registry)
        self._widen(label)
        self.money[v] = self.units(label)
        self.owned[v] = []
        self.touched.add(v)

    def contaminate(self, iv: DyadicInterval) -> None:
        self.contamination.contaminate(iv)

    def _widen(self, depth: int) -> None:
        if depth > self.scale:
            shift = depth - self.scale
            self.money = {v: m << shift for v, m in self.money.items()}
            self.revenue <<= shift
            self.scale = depth

    def units(self, depth: int) -> int:
        """``2**-depth`` in balance units."""
        return 1 << (self.scale - depth)

    def as_units(self, amount: DyadicAmount) -> int:
        self._widen(amount.exponent)
        return amount.mantissa << (self.scale - amount.exponent)

    def as_fraction(self, units: int) -> Fraction:
        return Fraction(units, 1 << self.scale)

    def _credit(self, seller: int, amount: int) -> None:
        if seller == ROOT:
            self.revenue += amount
        else:
            self.money[seller] += amount
        self.touched.add(seller)

    def check_quiescent(self) -> None:
        """Balances may dip mid-request (a restock is logged before the sale
        that pays for it) but must be non-negative between requests."""
        for v in self.touched:
            if v != ROOT and self.money[v] < 0:
                self.checks["ledger"].fail(
                    f"after seq {self.last_seq}: node {v} has money {self.as_fraction(self.money[v])}")

    def feed(self, ev) -> None:
        c = self.checks
        if ev.seq != self.last_seq + 1:
            c["lockstep"].fail(f"seq {ev.seq} follows {self.last_seq}")
        self.last_seq = ev.seq
        if isinstance(ev, Error):
            return
        bits = ev.interval.bits
        if isinstance(ev, Burn):
            if not self.contamination.fully_contaminated(ev.interval):
                c["burns"].fail(f"seq {ev.seq}: burned {ev.interval} was not fully contaminated")
            reg = self.registry
            seller = next((reg[bits[:i]] for i in range(len(bits) + 1) if bits[:i] in reg), None)
            if seller is None:
                c["burns"].fail(f"seq {ev.seq}: burned {ev.interval} is nobody's unsold space")
                return
            self.space[seller].remove(bits)
            self._widen(len(bits))
            self._credit(seller, self.units(len(bits)))
            self.burned.append(bits)
            self.payouts = self.payouts + ev.interval.measure
            return

        v = ev.node
        if v not in self.labels or v == ROOT:
            c["lockstep"].fail(f"seq {ev.seq}: alloc for unknown node {v}")
            return
        f = self.father[v]
        label = self.labels[v]
        self.touched.add(v)
        if not self.owned[v] and len(bits) != label:
            c["first_alloc"].fail(f"seq {ev.seq}: node {v} first gets {ev.interval}, not size 2^-{label}")
        if len(bits) > label:
            c["min_size"].fail(f"seq {ev.seq}: node {v} gets {ev.interval}, smaller than 2^-{label}")
        if self.contamination.fully_contaminated(ev.interval):
            c["clean_at_allocation"].fail(f"seq {ev.seq}: {ev.interval} fully contaminated when allocated")
        if not self.space[f].remove(bits):
            c["father_containment"].fail(
                f"seq {ev.seq}: node {v} gets {ev.interval}, not inside unsold space of father {f}")
        claimed = self.claimed.setdefault(f, set())
        prefixes = self.claimed_prefixes.setdefault(f, set())
        heads = [bits[:i] for i in range(len(bits) + 1)]
        if bits in prefixes or not claimed.isdisjoint(heads):
            c["sibling_disjoint"].fail(f"seq {ev.seq}: {ev.interval} overlaps space of a son of {f}")
        claimed.add(bits)
        heads.pop()
        prefixes.update(heads)
        self.owned[v].append(bits)
        self.space[v].add(bits)
        self._widen(len(bits))
        price = self.units(len(bits))
        self._credit(f, price)
        self.money[v] -= price

    def take_touched(self) -> set[int]:
        t = self.touched
        self.touched = set()
        return t

    def report(self) -> AuditReport:
        return AuditReport(list(self.checks.values()))


def _derived_checks(chk: LogChecker, tree: RequestTree | None, node_of: dict[int, int]) -> list[CheckResult]:
    out = []
    burned = CheckResult("burned_disjoint")
    clash = prefix_free(chk.burned)
    if clash:
        burned.fail(f"burned {clash[0] or '-'} and {clash[1]} overlap")
    if chk.payouts > chk.contamination.measure:
        burned.fail(f"payouts {chk.payouts} exceed contamination {chk.contamination.measure}")
    out.append(burned)

    ledger = CheckResult("replayed_ledger")
    for v, label in chk.labels.items():
        if v == ROOT:
            continue
        if chk.money[v] < 0:
            ledger.fail(f"node {v}: replayed money {chk.as_fraction(chk.money[v])} is negative")
        if chk.as_units(chk.space[v].measure()) + chk.money[v] != chk.units(label):
            ledger.fail(f"node {v}: replayed free + money != 2^-{label}")
    if chk.as_units(chk.space[ROOT].measure()) + chk.revenue != chk.units(0):
        ledger.fail("root: replayed free + revenue != 1")
    if tree is not None:
        for sid, v in node_of.items():
            if sid == ROOT:
                continue
            node = tree.nodes[v]
            if chk.as_units(node.money) != chk.money[sid]:
                ledger.fail(f"node {sid}: tree money {node.money} != replayed {chk.as_fraction(chk.money[sid])}")
            if set(iv.bits for iv in node.free.entries.values()) != chk.space[sid].pieces:
                ledger.fail(f"node {sid}: free list differs from replayed unsold space")
        if chk.as_units(tree.revenue) != chk.revenue:
            ledger.fail(f"root revenue {tree.revenue} != replayed {chk.as_fraction(chk.revenue)}")
        if tree.payouts != chk.payouts:
            ledger.fail(f"payouts {tree.payouts} != replayed {chk.payouts}")
    out.append(ledger)
    return out


def replay_audit(directives, events, rerun: bool = True) -> AuditReport:
    """Check an event log against the stream it claims to come from.

    Events are consumed in lockstep with the stream: the events for a
    request end with the Alloc of that request (or an error).  With
    ``rerun`` the stream is also executed afresh and the two logs must
    match line for line, and the fresh tree must pass the full audit.
    """
    chk = LogChecker()
    pos = 0
    events = list(events)
    stopped = False
    for d in directives:
        if stopped:
            break
        if isinstance(d, Contam):
            chk.contaminate(d.interval)
            continue
        chk.add_node(d.id, d.parent, d.label)
        while True:
            if pos >= len(events):
                chk.checks["lockstep"].fail(f"log ends before request {d.id} is served")
                stopped = True
                break
            ev = events[pos]
            pos += 1
            chk.feed(ev)
            if isinstance(ev, Error):
                stopped = True
                break
            if isinstance(ev, Alloc) and ev.node == d.id:
                chk.check_quiescent()
                chk.take_touched()
                break
    if pos < len(events):
        chk.checks["lockstep"].fail(f"{len(events) - pos} events left after the stream ends")

    report = chk.report()
    fresh = None
    node_of: dict[int, int] = {}
    if rerun:
        res = run_stream(directives)
        fresh = res.tree
        node_of = res.node_of
        same = CheckResult("rerun_identical")
        a, b = format_log(res.log), format_log(events)
        if a != b:
            la, lb = a.splitlines(), b.splitlines()
            i = next((i for i, (x, y) in enumerate(zip(la, lb)) if x != y), min(len(la), len(lb)))
            same.fail(f"first difference at event {i + 1}: fresh "
                      f"{la[i] if i < len(la) else '<end>'!r} vs log {lb[i] if i < len(lb) else '<end>'!r}")
        report.checks.append(same)
        tree_report = audit(fresh)
        report.checks += [CheckResult("tree_" + c.name, c.ok, c.detail) for c in tree_report.checks]
    if not stopped:
        report.checks += _derived_checks(chk, fresh, node_of if rerun else {})
    return report


class StepAuditor:
    """Per-request audit of a live tree, cheap enough to run after every step.

    Structural checks come from the event log through a LogChecker.  The
    accounting checks recompute free-list measures of every node the last
    step touched and keep a running money total for cash conservation.
    """

    def __init__(self, tree: RequestTree):
        self.tree = tree
        self.chk = LogChecker()
        self.cursor = 0
        # replayed balances already summed, in units of 2**-scale
        self.scale = self.chk.scale
        self.money_seen: dict[int, int] = {}
        self.money_units = 0
        self.failures: list[str] = []
        self.steps = 0

    def _fail(self, msg: str) -> None:
        self.failures.append(f"step {self.steps}: {msg}")

    def __call__(self, tree: RequestTree, directive) -> None:
        self.steps += 1
        chk = self.chk
        if isinstance(directive, Contam):
            chk.contaminate(directive.interval)
            return
        v = len(tree.nodes) - 1
        node = tree.nodes[v]
        chk.add_node(v, node.father, node.label)
        log = tree.log
        while self.cursor < len(log):
            chk.feed(log[self.cursor])
            self.cursor += 1
        chk.check_quiescent()
        for c in chk.checks.values():
            if not c.ok:
                self._fail(c.line())
                c.ok, c.detail = True, ""
        touched = chk.take_touched()
        for u in touched:
            n = tree.nodes[u]
            entries = n.free.entries
            # the replayed unsold space is disjoint by construction, so equality
            # with it also shows the free list is disjoint
            if {iv.bits for iv in entries.values()} != chk.space[u].pieces:
                self._fail(f"node {u}: free list differs from replayed unsold space")
            free_units = 0
            for k, iv in entries.items():
                if len(iv.bits) != k:
                    self._fail(f"node {u}: entry {iv} filed under size 2^-{k}")
                free_units += chk.units(k)
            cached = n.free.free_measure
            if chk.as_units(cached) != free_units:
                self._fail(f"node {u}: cached free measure {cached} is stale")
            if u == ROOT:
                if free_units + chk.as_units(tree.revenue) != chk.units(0):
                    self._fail(f"root free {cached} + revenue {tree.revenue} != 1")
                continue
            money = chk.as_units(n.money)
            if free_units + money != chk.units(n.label):
                self._fail(f"node {u}: free {cached} + money {n.money} != 2^-{n.label}")
            if money != chk.money[u]:
                self._fail(f"node {u}: money {n.money} != replayed {chk.as_fraction(chk.money[u])}")
        chk._widen(max(tree.revenue.exponent, tree.endowments.exponent, tree.payouts.exponent))
        shift = chk.scale - self.scale
        if shift:
            self.money_units <<= shift
            self.money_seen = {k: m << shift for k, m in self.money_seen.items()}
            self.scale = chk.scale
        seen = self.money_seen
        for u in touched:
            if u != ROOT:
                m = chk.money[u]
                self.money_units += m - seen.get(u, 0)
                seen[u] = m
        if self.money_units + chk.as_units(tree.revenue) != chk.as_units(tree.endowments) + chk.as_units(tree.payouts):
            self._fail(f"cash: money {chk.as_fraction(self.money_units)} + revenue {tree.revenue} != "
                       f"endowments {tree.endowments} + payouts {tree.payouts}")
        if tree.payouts > tree.contamination.measure:
            self._fail(f"payouts {tree.payouts} exceed contamination {tree.contamination.measure}")

    @property
    def ok(self) -> bool:
        return not self.failures


# ------------------------------------------------------------- kraft side

def kraft_chaitin_equiv(labels) -> bool:
    """Flat tree and the plain allocator hand out the same intervals."""
    labels = list(labels)
    total = sum((Fraction(1, 1 << l) for l in labels), Fraction(0))
    if total > 1:
        raise ValueError(f"labels violate Kraft's inequality (sum {total})")
    flat = allocate_sequence(labels)
    tree = RequestTree()
    hier = [tree.add_request(ROOT, l)[1] for l in labels]
    return flat == hier


def first_kraft_overflow(labels) -> int | None:
    """0-based index of the first request whose running sum of ``2**-l`` exceeds 1."""
    total = Fraction(0)
    for i, l in enumerate(labels):
        total += Fraction(1, 1 << l)
        if total > 1:
            return i
    return None


# ------------------------------------------------------- decoder trace

def check_delayed_read(cb, beta: str, result) -> list[str]:
    """Re-check a decode trace against the codebook enumeration.

    Every read must be justified by an already enumerated codeword of
    ``out+0`` or ``out+1`` that properly extends the bits read so far, and
    no read may happen while those bits already form such a codeword.
    Every output must be backed by an enumerated codeword equal to the
    bits read.  Returns the problems found, empty when the trace is sound.
    """
    problems: list[str] = []
    enum = cb.enumeration()
    known: dict[str, set[str]] = {}
    k = 0
    out = ""
    z = ""
    last_seq = 0
    for step in result.trace:
        kind, seq = step[0], step[1]
        if seq < last_seq:
            problems.append(f"trace goes back from seq {last_seq} to {seq}")
        last_seq = seq
        while k < len(enum) and enum[k][0] <= seq:
            _, x, cw = enum[k]
            known.setdefault(x, set()).add(cw.bits)
            k += 1
        sibs = known.get(out + "0", set()) | known.get(out + "1", set())
        if kind == "read":
            _, _, z_before, ext = step
            if z_before != z:
                problems.append(f"seq {seq}: read recorded at {z_before!r}, machine was at {z!r}")
            if z in sibs:
                problems.append(f"seq {seq}: read past the recognised codeword {z!r}")
            if ext not in sibs or not (len(ext) > len(z) and ext.startswith(z)):
                problems.append(f"seq {seq}: read at {z!r} not justified by {ext!r}")
            if len(z) >= len(beta):
                problems.append(f"seq {seq}: read beyond the oracle")
                break
            z += beta[len(z)]
        else:
            _, _, b, at = step
            if at != z or z not in known.get(out + b, ()):
                problems.append(f"seq {seq}: output {b} at {at!r} not backed by a codeword of {out + b!r}")
            out += b
    if out != result.out or z != result.z:
        problems.append(f"trace ends at out={out!r} z={z!r}, result says out={result.out!r} z={result.z!r}")
    uses = [s[3] for s in result.trace if s[0] == "output"]
    if [len(u) for u in uses] != list(result.use_profile):
        problems.append("use profile does not match the output steps")
    return problems


# ----------------------------------------------------- exhaustive sweep

@dataclass
class AgreementSummary:
    instances: int = 0
    within_budget: int = 0
    flat_over_budget: int = 0
    # counts, plus up to ``keep`` example instances of each
    allocator_failure_count: int = 0
    oracle_failure_count: int = 0
    flat_disagreement_count: int = 0
    allocator_failures: list = field(default_factory=list)
    oracle_failures: list = field(default_factory=list)
    flat_disagreements: list = field(default_factory=list)
    digest: str = ""

    @property
    def ok(self) -> bool:
        return not (self.allocator_failures or self.oracle_failures or self.flat_disagreements)


def exhaustive_agreement(max_requests: int = 6, max_label: int = 4, keep: int = 20) -> AgreementSummary:
    """Every request tree with up to ``max_requests`` requests and labels up to ``max_label``.

    Instances within budget must be served by the allocator and be feasible
    for the brute-force oracle.  Flat instances over budget must make both
    fail.  Other over-budget instances are not checked.  The allocator
    state is shared along the enumeration, so each instance costs one
    request on a copied tree.
    """
    summary = AgreementSummary()
    h = hashlib.sha256()
    one = DyadicAmount.one()

    def note(kind, inst):
        setattr(summary, kind + "_count", getattr(summary, kind + "_count") + 1)
        bucket = getattr(summary, kind + "s")
        if len(bucket) < keep:
            bucket.append(tuple(inst))

    def visit(tree, inst, endow, flat, failed):
        k = len(inst)
        if k == max_requests:
            return
        for parent in range(k + 1):
            child_flat = flat and parent == ROOT
            for label in range(1, max_label + 1):
                e2 = endow + DyadicAmount.pow2(label)
                inst.append((parent, label))
                within = e2 <= one
                if within or child_flat:
                    summary.instances += 1
                    h.update(b"%d %d;" % (parent, label))
                    t2 = None
                    alloc_ok = False
                    if not failed:
                        t2 = tree.copy()
                        mark = len(t2.log)
                        try:
                            t2.add_request(parent, label)
                            alloc_ok = True
                        except KraftViolation:
                            pass
                        h.update(format_log(t2.log[mark:]).encode())
                    feasible = brute_force_feasible(inst)
                    if within:
                        summary.within_budget += 1
                        if not alloc_ok:
                            note("allocator_failure", inst)
                        if not feasible:
                            note("oracle_failure", inst)
                    else:
                        summary.flat_over_budget += 1
                        if alloc_ok or feasible:
                            note("flat_disagreement", inst)
                    visit(t2 if alloc_ok else tree, inst, e2, child_flat, failed or not alloc_ok)
                inst.pop()

    visit(RequestTree(), [], DyadicAmount.zero(), True, False)
    summary.digest = h.hexdigest()
    return summary
