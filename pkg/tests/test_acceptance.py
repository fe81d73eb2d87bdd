"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest, or directly with ``python3 tests/test_acceptance.py``.
Each criterion returns (ok, detail, digest); the digest hashes every log
the criterion produced so that criterion 8 can compare two runs.
"""

from __future__ import annotations

import hashlib
import random
import sys
import time
from fractions import Fraction

import pytest

from hierkraft.codec import build_codebook, check_use_bound, decode, encode, load_length_function, tabulate
from hierkraft.contam import ContaminationSet
from hierkraft.dyadic import DyadicAmount, prefix_free
from hierkraft.hier import ROOT, audit
from hierkraft.kraft import KraftViolation, new_allocator
from hierkraft.stream import Contam, Req, format_log, parse_stream, run_stream
from hierkraft.verify import (
    StepAuditor,
    StreamSpec,
    check_delayed_read,
    exhaustive_agreement,
    first_kraft_overflow,
    kraft_chaitin_equiv,
    random_stream,
    replay_audit,
)

ONE = DyadicAmount.one()


class Outcome:
    def __init__(self, name, limit=None):
        self.name = name
        self.limit = limit
        self.ok = True
        self.detail = ""
        self.digest = hashlib.sha256()
        self.t0 = time.perf_counter()
        self.elapsed = 0.0

    def fail(self, msg):
        if self.ok:
            self.ok = False
            self.detail = msg

    def feed(self, text):
        self.digest.update(text.encode())

    def done(self, summary):
        self.elapsed = time.perf_counter() - self.t0
        if self.limit is not None and self.elapsed >= self.limit:
            self.fail(f"took {self.elapsed:.1f}s, limit {self.limit}s")
        if self.ok:
            self.detail = summary
        return self

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'} criterion {self.name} ({self.elapsed:.1f}s): {self.detail}"


def _seed(criterion: int, i: int) -> int:
    return criterion * 1_000_003 + i


def criterion_1():
    out = Outcome("1 kraft-chaitin soundness", limit=5)
    over = 0
    for i in range(1000):
        rng = random.Random(_seed(1, i))
        # a flat stream inside the budget
        spec = StreamSpec(seed=_seed(1, i), nodes=rng.randint(1, 200), max_label=16,
                          hier_prob=0.0, min_label=rng.randint(1, 10))
        labels = [d.label for d in random_stream(spec)]
        fl = new_allocator()
        try:
            got = [fl.allocate(l) for l in labels]
        except KraftViolation:
            out.fail(f"seed {spec.seed}: violation inside the budget")
            continue
        if [iv.depth for iv in got] != labels or prefix_free(iv.bits for iv in got):
            out.fail(f"seed {spec.seed}: outputs not prefix-free of the requested lengths")
        out.feed(" ".join(iv.serialize() for iv in got) + "\n")
        # an unconstrained list, usually over budget
        lo = rng.randint(1, 9)
        labels = [rng.randint(lo, 16) for _ in range(rng.randint(1, 200))]
        stop = first_kraft_overflow(labels)
        fl = new_allocator()
        failed_at = None
        got = []
        for j, l in enumerate(labels):
            try:
                got.append(fl.allocate(l))
            except KraftViolation:
                failed_at = j
                break
        if stop is not None:
            over += 1
        if failed_at != stop:
            out.fail(f"list {i}: allocator failed at {failed_at}, first overflow is {stop}")
        if prefix_free(iv.bits for iv in got):
            out.fail(f"list {i}: outputs overlap")
        out.feed(" ".join(iv.serialize() for iv in got) + f" | {failed_at}\n")
    return out.done(f"1000 streams in budget served; {over}/1000 over-budget lists fail exactly at the first overflow")


def criterion_2():
    out = Outcome("2 hierarchical invariants", limit=30)
    events = 0
    for i in range(1000):
        rng = random.Random(_seed(2, i))
        spec = StreamSpec(seed=_seed(2, i), nodes=rng.randint(1, 500), max_label=18,
                          hier_prob=rng.choice((0.3, 0.6, 0.9, 1.0)), min_label=rng.randint(1, 10))
        directives = random_stream(spec)
        auditor = []

        def hook(tree, d):
            if not auditor:
                auditor.append(StepAuditor(tree))
            auditor[0](tree, d)

        res = run_stream(directives, after_step=hook)
        if not res.ok:
            out.fail(f"seed {spec.seed}: kraft_violation within budget")
            continue
        if not auditor[0].ok:
            out.fail(f"seed {spec.seed}: {auditor[0].failures[0]}")
        report = audit(res.tree)
        if not report.ok:
            out.fail(f"seed {spec.seed}: final audit {report.failures()[0].line()}")
        events += len(res.tree.log)
        out.feed(format_log(res.log))
    return out.done(f"1000 streams, {events} events, all invariants exact after every request")


def criterion_3():
    out = Outcome("3 flat equivalence")
    for i in range(200):
        rng = random.Random(_seed(3, i))
        lo = rng.randint(1, 10)
        labels = [rng.randint(lo, 16) for _ in range(rng.randint(0, 200))]
        stop = first_kraft_overflow(labels)
        if stop is not None:
            labels = labels[:stop]
        if not kraft_chaitin_equiv(labels):
            out.fail(f"list {i}: hierarchical and flat allocators differ")
        out.feed(" ".join(map(str, labels)) + "\n")
    return out.done("200 label lists give identical interval sequences")


def _fill_to_one(directives, rng):
    """Append requests that use up exactly what the stream leaves free."""
    c = ContaminationSet(d.interval for d in directives if isinstance(d, Contam))
    endow = DyadicAmount.sum_pow2(d.label for d in directives if isinstance(d, Req))
    rest = ONE - endow - c.measure
    ids = max((d.id for d in directives if isinstance(d, Req)), default=0)
    m, e = rest.mantissa, rest.exponent
    out = list(directives)
    for k in range(e):
        if m >> k & 1:
            ids += 1
            out.append(Req(ids, rng.randint(0, ids - 1) if rng.random() < 0.5 else ROOT, e - k))
    return out


def criterion_4():
    out = Outcome("4 contamination lemma", limit=30)
    burns = tight = 0
    for i in range(500):
        rng = random.Random(_seed(4, i))
        spec = StreamSpec(seed=_seed(4, i), nodes=rng.randint(1, 300), max_label=12,
                          hier_prob=rng.choice((0.0, 0.5, 0.9)), min_label=rng.randint(1, 8),
                          contam_frac=Fraction(rng.randint(1, 7), 8))
        directives = random_stream(spec)
        if i % 2:
            directives = _fill_to_one(directives, rng)
        res = run_stream(directives)
        t = res.tree
        if not res.ok:
            out.fail(f"seed {spec.seed}: kraft_violation")
            continue
        report = replay_audit(directives, res.log)
        if not report.ok:
            out.fail(f"seed {spec.seed}: {report.failures()[0].line()}")
        led = t.insurance
        if led.payouts != DyadicAmount.sum_pow2(b.depth for b in led.burned):
            out.fail(f"seed {spec.seed}: payouts differ from burned measure")
        if led.payouts > t.contamination.measure:
            out.fail(f"seed {spec.seed}: payouts exceed contamination")
        if t.endowments + t.contamination.measure == ONE:
            tight += 1
        burns += len(led.burned)
        out.feed(format_log(res.log))

    hand = run_stream(parse_stream("contam 0\nreq 1 0 1\n"))
    t = hand.tree
    if not (hand.ok and t.payouts == DyadicAmount.parse("1/2") and t.revenue == ONE
            and t.root.free.free_measure.is_zero() and audit(t).ok):
        out.fail("hand example: expected payout 1/2, revenue 1, root free 0")
    out.feed(format_log(hand.log))
    return out.done(f"500 streams ({tight} tight), {burns} burns, replay clean; hand example payout 1/2 revenue 1")


def criterion_5_6():
    o5 = Outcome("5 codec roundtrip", limit=10)
    o6 = Outcome("6 delayed read")
    K = load_length_function(tabulate(lambda x: 2 * len(x), 8), 8)
    cb = build_codebook(K)
    o5.feed(format_log(cb.log))
    n = 0
    for length in range(1, 9):
        for v in range(1 << length):
            alpha = format(v, f"0{length}b")
            beta, _ = encode(cb, alpha)
            res = decode(cb, beta)
            n += 1
            if not res.out.startswith(alpha):
                o5.fail(f"alpha {alpha}: decoded {res.out!r}")
                continue
            if any(res.use_profile[k - 1] > 2 * k for k in range(1, length + 1)):
                o5.fail(f"alpha {alpha}: use {res.use_profile} exceeds 2n")
            report = check_use_bound(K, alpha, res.use_profile)
            if not report.ok:
                o5.fail(f"alpha {alpha}: {next(l for l in report.lines() if l.startswith('FAIL'))}")
            problems = check_delayed_read(cb, beta, res)
            if problems:
                o6.fail(f"alpha {alpha}: {problems[0]}")
            o5.feed(f"{alpha} {beta} {res.out} {' '.join(map(str, res.use_profile))}\n")
            o6.feed(repr(res.trace) + "\n")
    o5.done(f"{n} targets decode correctly within 2n and the monotone bound")
    o6.elapsed = o5.elapsed
    o6.done(f"{n} traces: every read justified, none past a codeword")
    return o5, o6


def criterion_7():
    out = Outcome("7 brute-force agreement", limit=60)
    s = exhaustive_agreement(6, 4)
    out.feed(s.digest)
    out.feed(f"{s.instances} {s.allocator_failure_count} {s.oracle_failure_count} {s.flat_disagreement_count}")
    if s.allocator_failure_count:
        out.fail(f"allocator failed within budget, e.g. {s.allocator_failures[0]}")
    if s.flat_disagreement_count:
        out.fail(f"flat over-budget disagreement, e.g. {s.flat_disagreements[0]}")
    if s.oracle_failure_count:
        out.fail(f"single-interval oracle infeasible on {s.oracle_failure_count}/{s.within_budget} "
                 f"instances within budget, e.g. {s.oracle_failures[0]}; allocator failures "
                 f"{s.allocator_failure_count}, flat disagreements {s.flat_disagreement_count}")
    return out.done(f"{s.instances} instances agree")


def run_all():
    results = [criterion_1(), criterion_2(), criterion_3(), criterion_4(), *criterion_5_6(), criterion_7()]
    return {r.name.split()[0]: r for r in results}


_cache: dict = {}


def first_run():
    if "first" not in _cache:
        _cache["first"] = run_all()
    return _cache["first"]


def criterion_8(first):
    out = Outcome("8 determinism")
    second = run_all()
    diff = [k for k in first if first[k].digest.hexdigest() != second[k].digest.hexdigest()]
    if diff:
        out.fail(f"criteria {', '.join(diff)} changed between runs")
    return out.done("criteria 1-7 logs byte-identical across two runs")


def _report(capsys, outcome):
    with capsys.disabled():
        print("\n" + outcome.line())
    assert outcome.ok, outcome.line()


@pytest.mark.parametrize("key", ["1", "2", "3", "4", "5", "6", "7"])
def test_criterion(key, capsys):
    _report(capsys, first_run()[key])


def test_criterion_8(capsys):
    _report(capsys, criterion_8(first_run()))


if __name__ == "__main__":
    first = run_all()
    results = list(first.values()) + [criterion_8(first)]
    for r in results:
        print(r.line())
    sys.exit(0 if all(r.ok for r in results) else 1)
