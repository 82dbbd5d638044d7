"""Walk through one run of the iterative ascending mechanism.

Three players share two items. Costs are per-item tables over player subsets;
valuations depend only on bundle size. The mechanism quotes each item at its
running maximum average cost, finalizes the player with the smallest optimal
bundle each round, and raises quotes as players withdraw.
"""

from fractions import Fraction as F

from costshare import (Instance, SeparableCosts, SymmetricSubmodularValuation,
                       allocation_cost, iacsm_run, verify_final_set_structure,
                       verify_p1, verify_p2)
from costshare.costs import symmetric_submodular_cost, table_cost

valuations = (
    SymmetricSubmodularValuation((F(3), F(1))),        # eager for one item
    SymmetricSubmodularValuation((F(5, 2), F(2))),     # wants both if cheap
    SymmetricSubmodularValuation((F(1, 2), F(0))),     # nearly indifferent
)
costs = SeparableCosts((
    symmetric_submodular_cost(3, [F(3), F(2), F(1)]),  # economies of scale
    table_cost([0, 2, 2, 3, 2, 3, 3, 4]),              # almost additive
))
inst = Instance(valuations=valuations, cost_model=costs, m=2)

outcome, trace = iacsm_run(inst)

print("finalization order:", trace.order)
for t, (player, bundle) in enumerate(zip(trace.order, trace.bundle_history)):
    items = [j for j in range(inst.m) if (bundle >> j) & 1]
    print(f"  iteration {t}: player {player} takes items {items or 'none'}")

print("\nquoted share history (one row per item, one column per iteration):")
for j, history in enumerate(trace.share_history):
    print(f"  item {j}:", " -> ".join(str(s) for s in history))

print("\npayments:", outcome.payments)
print("total payments:", outcome.total_payment)
print("allocation cost:", allocation_cost(inst, outcome.allocation))
print("quoted-share monotonicity:", verify_p1(trace))
print("bundle refinement along the order:", verify_p2(outcome, trace))
print("served sets are order suffixes:", verify_final_set_structure(outcome, trace))
