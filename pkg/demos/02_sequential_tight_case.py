"""The sequential mechanism on the cost function that pins its harmonic factor.

Standalone costs are k/1, k/2, ..., k/n with the total capped at k; each
player values the single item just below her standalone cost. The mechanism
serves nobody, while serving everyone would cost only k, so the social-cost
ratio climbs to H_n as the valuation slack shrinks.
"""

from fractions import Fraction as F

from costshare import evaluate_run, harmonic
from costshare.cli.gen import generate

n, k = 3, 6
print(f"n = {n}, cap k = {k}, H_n = {harmonic(n)}")
print(f"{'eps':>10} {'social cost':>12} {'optimum':>8} {'ratio':>10}")
for t in range(1, 5):
    eps = F(1, 10 ** t)
    inst = generate("paper-tight", {"n": str(n), "k": str(k), "eps": str(eps)}, 0)
    report = evaluate_run(inst, "sm")
    assert report.outcome.allocation.bundles == (0,) * n
    print(f"{str(eps):>10} {str(report.social_cost):>12} "
          f"{str(report.optimal_social_cost):>8} {str(report.approx_ratio):>10}")

print("\nthe ratio approaches H_n from below; budget balance is exact throughout")
