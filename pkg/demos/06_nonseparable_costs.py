"""Non-separable allocation costs with the sequential mechanism.

Cost here depends on the whole allocation, not on per-item player sets: a
flat connection fee per served player, and a fee per distinct item
provisioned. Budget balance stays exact (payments telescope), and the
min/max-bounded parameters, estimated over every allocation, bound the
social-cost ratio.
"""

from fractions import Fraction as F

from costshare import Instance, TableValuation, evaluate_run, harmonic
from costshare.costs import (alpha_max_bounded_ns, alpha_min_bounded_ns,
                             count_served_cost, union_items_cost)

valuations = (
    TableValuation.from_values([0, 2, 1, F(5, 2)]),
    TableValuation.from_values([0, F(1, 2), 3, 3]),
    TableValuation.from_values([0, 1, 1, 2]),
)

for make, label in ((count_served_cost, "connection fee per served player"),
                    (union_items_cost, "fee per provisioned item")):
    C = make(3, 2, weight=F(3, 2))
    inst = Instance(valuations=valuations, cost_model=C, m=2)
    report = evaluate_run(inst, "sm")
    a_min = alpha_min_bounded_ns(C).alpha
    a_max = alpha_max_bounded_ns(C).alpha
    print(f"{label} ({C.kind}):")
    print(f"  bundles {report.outcome.allocation.bundles}, payments "
          f"{report.outcome.payments}")
    print(f"  budget ratio {report.budget_ratio}, approx ratio {report.approx_ratio}")
    print(f"  min-bounded {a_min} (social-cost factor {a_min * harmonic(inst.n)}), "
          f"max-bounded {a_max} (factor {a_max})")
    print()
