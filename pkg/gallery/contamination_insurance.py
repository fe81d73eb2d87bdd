"""Allocation next to a growing contaminated region.

Nobody may receive an interval that is entirely contaminated at the time
of sale.  When that would happen the interval is burned, the buyer is
refunded out of an insurance fund and buys again.  As long as the requests
plus the contaminated measure stay within 1, space never runs out.
"""

from hierkraft import ROOT, audit, new_tree
from hierkraft.stream import format_log, parse_stream, run_stream

# the tight case: half the unit is contaminated, the other half requested
t = new_tree()
t.contaminate("0")
v, x = t.add_request(ROOT, 1)
print(f"node {v} receives {x.bits}; burned {[b.bits for b in t.insurance.burned]}")
print(f"payouts {t.payouts}, revenue {t.revenue}, root free {t.root.free.free_measure}")

stream = """
req 1 0 2
contam 01
req 2 1 4
req 3 1 4
contam 110
req 4 0 3
req 5 4 4
"""
res = run_stream(parse_stream(stream))
print()
print(format_log(res.log), end="")
print(f"endowments {res.tree.endowments} + contamination {res.tree.contamination.measure} <= 1")
print(f"payouts {res.tree.payouts} <= contamination {res.tree.contamination.measure}")
print("audit ok:", audit(res.tree).ok)
