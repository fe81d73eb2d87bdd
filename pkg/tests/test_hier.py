import pytest
from hypothesis import given, settings, strategies as st

from hierkraft.dyadic import DyadicAmount
from hierkraft.hier import ROOT, KraftViolation, audit, new_tree
from hierkraft.events import Alloc, Error

q = DyadicAmount.parse


def bits(ivs):
    return [iv.bits for iv in ivs]


def test_fresh_tree():
    t = new_tree()
    assert t.root.free.free_measure == DyadicAmount.one()
    assert t.revenue.is_zero()
    assert t.log == []
    assert audit(t).ok
    assert bits(t.owned(ROOT)) == [""]


def test_first_request_and_pass_through():
    t = new_tree()
    v, x = t.add_request(ROOT, 2)
    assert (v, x.bits) == (1, "00")
    assert sorted(bits(t.root.free.intervals())) == ["01", "1"]
    assert t.revenue == q("1/4")
    w, y = t.add_request(v, 1)
    assert (w, y.bits) == (2, "1")
    assert bits(t.owned(v)) == ["00", "1"]
    assert [ev.line() for ev in t.log] == ["alloc 1 00 1", "alloc 1 1 2", "alloc 2 1 3"]
    for n in (v, w):
        node = t.nodes[n]
        assert node.free.free_measure + node.money == DyadicAmount.pow2(node.label)
    assert audit(t).ok


def test_three_halves_fail():
    t = new_tree()
    t.add_request(ROOT, 1)
    t.add_request(ROOT, 1)
    with pytest.raises(KraftViolation):
        t.add_request(ROOT, 1)
    assert t.log[-1] == Error("kraft_violation", 3)
    with pytest.raises(RuntimeError):
        t.add_request(ROOT, 5)


def five_sons():
    t = new_tree()
    a, _ = t.add_request(ROOT, 2)
    got = [t.add_request(a, 4)[1].bits for _ in range(5)]
    return t, a, got


def test_five_sons_restock():
    t, a, got = five_sons()
    assert got == ["0000", "0001", "0010", "0011", "0100"]
    assert bits(t.owned(a)) == ["00", "01"]
    node = t.nodes[a]
    assert node.free.free_measure == q("3/16")
    assert node.money == q("1/16")


def test_five_sons_cash():
    t, a, _ = five_sons()
    assert t.endowments == q("9/16")
    assert t.revenue == q("8/16")
    money = sum((n.money for n in t.nodes[1:]), DyadicAmount.zero())
    assert money == q("1/16")
    assert audit(t).ok


def test_exact_case_at_root():
    t = new_tree()
    t.add_request(ROOT, 1)
    assert bits(t.root.free.intervals()) == ["1"]
    _, x = t.add_request(ROOT, 1)
    assert x.bits == "1"
    assert len(t.root.free) == 0
    assert t.revenue == DyadicAmount.one()


def test_new_node_owns_one_interval():
    t = new_tree()
    v, x = t.add_request(ROOT, 3)
    assert t.owned(v) == [x] and x.measure == q("1/8")


def test_audit_catches_corrupt_money():
    t, a, _ = five_sons()
    t.nodes[a].money = DyadicAmount.zero()
    report = audit(t)
    assert not report["ledger"].ok
    assert f"node {a}:" in report["ledger"].detail
    assert not report["cash_conservation"].ok
    assert report["min_size"].ok


def test_audit_catches_overlapping_brothers():
    t = new_tree()
    t.add_request(ROOT, 2)
    t.add_request(ROOT, 2)
    t.nodes[2].owned[0] = t.nodes[1].owned[0]
    assert not audit(t)["sibling_disjoint"].ok


def test_unknown_father_and_bad_label():
    t = new_tree()
    with pytest.raises(KeyError):
        t.add_request(7, 1)
    with pytest.raises(ValueError):
        t.add_request(ROOT, 0)


def test_deep_chain_does_not_hit_recursion_limit():
    t = new_tree()
    v = ROOT
    for _ in range(3000):
        v, _ = t.add_request(v, 62)
    assert audit(t).ok


@st.composite
def hier_requests(draw):
    """(father, label) lists with endowments <= 1."""
    out, budget = [], DyadicAmount.one()
    for _ in range(draw(st.integers(0, 40))):
        label = draw(st.integers(1, 12))
        if DyadicAmount.pow2(label) > budget:
            continue
        budget = budget - DyadicAmount.pow2(label)
        out.append((draw(st.integers(0, len(out))), label))
    return out


@settings(max_examples=300, deadline=None)
@given(hier_requests())
def test_never_runs_out_within_budget(reqs):
    t = new_tree()
    for father, label in reqs:
        t.add_request(father, label)
        report = audit(t)
        assert report.ok, str(report)
    for ev in t.log:
        assert isinstance(ev, Alloc)
