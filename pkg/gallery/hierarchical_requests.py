"""Requests that refer to earlier requests.

A son's space must lie in its father's, brothers' spaces must be disjoint.
Every node pays for what it buys and is paid for what it sells, and the
books show why the root never runs dry: each non-root node always has
free space + money = its own size.
"""

from hierkraft import ROOT, audit, new_tree


def show(t):
    for n in t.nodes[1:]:
        print(f"  node {n.id} label {n.label}: owns {[iv.bits for iv in n.owned]}"
              f" free {[iv.bits for iv in n.free]} money {n.money}")
    print(f"  root revenue {t.revenue}, endowments {t.endowments}")


t = new_tree()
a, _ = t.add_request(ROOT, 2)
print("A asks for 1/4 from the root")
show(t)

print("five sons of A ask for 1/16 each; the fifth makes A buy another quarter")
for _ in range(5):
    t.add_request(a, 4)
show(t)

print("a son of A asks for 1/4, as much as A itself: A buys it and passes it on")
t.add_request(a, 2)
show(t)

print()
print(audit(t))
print()
print("event log:")
for ev in t.log:
    print(" ", ev.line())
