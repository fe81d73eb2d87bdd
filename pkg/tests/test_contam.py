from hypothesis import given, settings, strategies as st

from hierkraft.contam import ContaminationSet
from hierkraft.dyadic import DyadicAmount, DyadicInterval
from hierkraft.events import Alloc, Burn
from hierkraft.hier import ROOT, audit, new_tree
from hierkraft.stream import Req, Contam, run_stream

q = DyadicAmount.parse
iv = DyadicInterval


def cset(*bits):
    return ContaminationSet(iv(b) for b in bits)


def test_measure_examples():
    assert cset().measure.is_zero()
    assert cset("0").measure == q("1/2")
    assert cset("0", "10").measure == q("3/4")
    assert cset("0", "1").measure == DyadicAmount.one()


def test_sibling_merge_and_absorption():
    c = cset("00", "01")
    assert [x.bits for x in c.covered()] == ["0"]
    assert c.measure == q("1/2")
    c = cset("0", "011")
    assert [x.bits for x in c.covered()] == ["0"]
    c = cset("011", "0")
    assert [x.bits for x in c.covered()] == ["0"]


def test_fully_contaminated():
    assert cset("0").fully_contaminated(iv("01"))
    assert cset("00", "01").fully_contaminated(iv("0"))
    assert not cset("0").fully_contaminated(iv(""))
    assert not cset("010").fully_contaminated(iv("01"))


def test_burn_and_retry_tight_case():
    t = new_tree()
    t.contaminate("0")
    v, x = t.add_request(ROOT, 1)
    assert x.bits == "1"
    assert [e.line() for e in t.log] == ["burn 0 1", "alloc 1 1 2"]
    assert t.owned(v) == [iv("1")]
    assert t.revenue == DyadicAmount.one()
    assert t.payouts == q("1/2")
    assert t.endowments == q("1/2")
    assert t.root.free.free_measure.is_zero()
    assert audit(t).ok


def test_burn_quarter():
    t = new_tree()
    t.contaminate("00")
    _, x = t.add_request(ROOT, 2)
    assert x.bits == "01"
    assert isinstance(t.log[0], Burn) and t.log[0].interval == iv("00")


def test_partial_contamination_is_allowed():
    t = new_tree()
    t.contaminate("01")
    _, x = t.add_request(ROOT, 1)
    assert x.bits == "0"
    assert t.payouts.is_zero()


def test_burn_at_inner_hop():
    # node 1 restocks while part of the unit is contaminated
    t = new_tree()
    a, _ = t.add_request(ROOT, 2)
    t.contaminate("01")
    t.add_request(a, 3)
    t.add_request(a, 3)
    t.add_request(a, 3)
    assert any(isinstance(e, Burn) and e.interval == iv("01") for e in t.log)
    assert audit(t).ok


def test_empty_contamination_matches_plain_run():
    reqs = [Req(1, 0, 3), Req(2, 1, 2), Req(3, 1, 5), Req(4, 0, 2), Req(5, 4, 4)]
    plain = run_stream(reqs)
    noisy = run_stream([Contam(iv("1111111111"))] + reqs)
    # the contamination is never fully covering anything sold here
    assert [e.line() for e in plain.log] == [e.line() for e in noisy.log]


@st.composite
def contaminated_runs(draw):
    directives, endow, cs, ids = [], DyadicAmount.zero(), ContaminationSet(), 0
    for _ in range(draw(st.integers(1, 40))):
        if draw(st.booleans()):
            d = draw(st.integers(1, 6))
            x = iv(format(draw(st.integers(0, (1 << d) - 1)), f"0{d}b"))
            trial = cs.copy()
            trial.contaminate(x)
            if endow + trial.measure <= DyadicAmount.one():
                cs = trial
                directives.append(Contam(x))
        else:
            label = draw(st.integers(1, 8))
            if endow + DyadicAmount.pow2(label) + cs.measure <= DyadicAmount.one():
                endow = endow + DyadicAmount.pow2(label)
                ids += 1
                directives.append(Req(ids, draw(st.integers(0, ids - 1)), label))
    return directives


@settings(max_examples=300, deadline=None)
@given(contaminated_runs())
def test_contamination_lemma(directives):
    res = run_stream(directives)
    assert res.ok
    t = res.tree
    assert audit(t).ok
    led = t.insurance
    assert led.payouts <= t.contamination.measure
    assert all(t.contamination.fully_contaminated(b) for b in led.burned)
