"""Small instances against a brute-force search.

The search looks for one interval per request, of exactly the requested
size, nested in the father's and disjoint from the brothers'.  The online
allocator is allowed more: a node may own several intervals.  So a
within-budget instance where a son asks for more than his father has no
single-interval solution, yet the allocator serves it.
"""

from hierkraft import brute_force_feasible, new_tree
from hierkraft.verify import exhaustive_agreement

inst = [(0, 3), (1, 1)]
t = new_tree()
for parent, label in inst:
    t.add_request(parent, label)
print(inst, "allocator owns", {n.id: [iv.bits for iv in n.owned] for n in t.nodes[1:]},
      "single-interval feasible:", brute_force_feasible(inst))

s = exhaustive_agreement(4, 3)
print(f"{s.instances} instances up to 4 requests, labels <= 3")
print(f"  allocator failures within budget: {s.allocator_failure_count}")
print(f"  flat over-budget disagreements:   {s.flat_disagreement_count}")
print(f"  no single-interval solution:      {s.oracle_failure_count} of {s.within_budget}")
