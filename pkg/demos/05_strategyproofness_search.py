"""Falsification search for weak group-strategyproofness.

Every coalition of size up to two tries every joint misreport from a grid of
symmetric submodular valuations; a witness must make every member strictly
better off under their true valuations. The intact mechanisms survive; a
variant that quotes half prices in its first iteration does not, because a
player lured into a bundle ends up paying the unhalved share.
"""

from fractions import Fraction as F

from costshare import Instance, SeparableCosts, SymmetricSubmodularValuation
from costshare.analysis import symmetric_marginal_space, wgsp_search
from costshare.cli.gen import generate
from costshare.costs import public_good_cost

grid = [F(t, 2) for t in range(9)]

inst = generate("random-symmetric", {"n": "3", "m": "2"}, 5)
space = symmetric_marginal_space(2, grid)
print(f"searching {len(space)}^2 joint misreports per coalition pair ...")
for mechanism in ("iacsm", "sm"):
    witness = wgsp_search(inst, mechanism, 2, space)
    print(f"  {mechanism}: {'no deviation found' if witness is None else witness}")

print("\nnegative control: first-iteration quotes halved")
lured = Instance(
    valuations=(SymmetricSubmodularValuation((F(3, 2),)),
                SymmetricSubmodularValuation((F(4),))),
    cost_model=SeparableCosts((public_good_cost(2, 4),)), m=1)
witness = wgsp_search(lured, "iacsm-underquote", 2, symmetric_marginal_space(1, grid))
print("  witness:", witness)
print("  player 0 is quoted 1, accepts, then pays the true share 2 for value 3/2;")
print("  reporting", witness.misreports[0].marginals[0], "instead walks away and gains",
      witness.gains[0])
