"""Cost-function models, class checkers and average-cost-share estimators.

The three estimators quantify how the average cost c(T)/|T| behaves:

* average-decreasing: least a >= 1 with a*c(S)/|S| >= c(T)/|T| for all S <= T;
* average min-bounded: least a with a*c(T)/|T| >= min standalone cost in T;
* average max-bounded: same with the max standalone cost.

Each returns the least parameter satisfying the defining inequality on every
subset, together with a witnessing subset (pair). Ratio conventions at zero
follow from reading the definitions as inequalities: a 0/0 constraint is
vacuous and contributes the clamp value 1, while a positive requirement
against a zero average is unsatisfiable and reported as unbounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import isqrt
from typing import Callable, Sequence

from .core import (Allocation, AllocationCostFn, GroundSetTooLargeError, Rat,
                   SeparableCosts, SetFunction, as_rat, bits, restrict_allocation)
from .valuations import ClassFlags, classify_set_function

MAX_ESTIMATOR_GROUND = 16
MAX_BOUNDED_GROUND = 20
MAX_NS_CELLS = 12

SQRT_SCALE = 10 ** 6


class InfeasibleCoverError(RuntimeError):
    """A set-cover query asked for players that the family cannot cover."""


def table_cost(values: Sequence) -> SetFunction:
    """Dense cost table over player subsets; c(empty) must be 0."""
    return SetFunction.from_table(values, require_zero_empty=True, kind="table")


def set_cover_cost(n: int, family: Sequence[int]) -> SetFunction:
    """Minimum-cardinality set cover cost.

    Players are the universe elements 0..n-1 and ``family`` holds the
    available sets as element masks. c(t) is the least number of family sets
    whose union contains t, found by branch and bound on the lowest uncovered
    element. Uncoverable queries raise InfeasibleCoverError.
    """
    fam = [int(s) for s in family]
    if any(s < 0 or s >> n for s in fam):
        raise ValueError("family sets must be subsets of the player universe")
    coverable = 0
    for s in fam:
        coverable |= s
    max_size = max((s.bit_count() for s in fam), default=0)

    def solve(t: int) -> Rat:
        if t & ~coverable:
            missing = next(bits(t & ~coverable))
            raise InfeasibleCoverError(f"player {missing} is in no family set")

        best = len(fam) + 1

        def dfs(uncovered: int, used: int):
            nonlocal best
            if uncovered == 0:
                best = min(best, used)
                return
            if max_size and used + -(-uncovered.bit_count() // max_size) >= best:
                return
            e = uncovered & -uncovered
            for s in fam:
                if s & e:
                    dfs(uncovered & ~s, used + 1)

        dfs(t, 0)
        return Fraction(best)

    return SetFunction.from_oracle(n, solve, require_zero_empty=True,
                                   kind="set-cover", meta={"family": fam})


def _two_color(num_vertices: int, edges: Sequence[tuple[int, int]]) -> list[int] | None:
    """2-color the graph, or None if an odd cycle exists."""
    color = [-1] * num_vertices
    for start in range(num_vertices):
        if color[start] != -1:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for a, b in edges:
                if a == u or b == u:
                    w = b if a == u else a
                    if color[w] == -1:
                        color[w] = 1 - color[u]
                        stack.append(w)
                    elif color[w] == color[u]:
                        return None
    return color


def vertex_cover_cost(edges: Sequence[tuple[int, int]]) -> SetFunction:
    """Minimum vertex cover cost; players are the edges of the graph.

    c(t) is the size of a minimum vertex cover of the subgraph induced by the
    edges in t, found by branching on an uncovered edge.
    """
    edge_list = [(int(u), int(v)) for u, v in edges]
    if any(u == v for u, v in edge_list):
        raise ValueError("self-loops are not allowed")

    def solve(t: int) -> Rat:
        chosen = [edge_list[i] for i in bits(t)]
        best = len(chosen) + 1

        def dfs(remaining: list, used: int):
            nonlocal best
            if not remaining:
                best = min(best, used)
                return
            if used + 1 >= best:
                return
            u, v = remaining[0]
            dfs([e for e in remaining if u not in e], used + 1)
            dfs([e for e in remaining if v not in e], used + 1)

        dfs(chosen, 0)
        return Fraction(best)

    return SetFunction.from_oracle(len(edge_list), solve, require_zero_empty=True,
                                   kind="vertex-cover", meta={"edges": edge_list})


def matching_cost(edges: Sequence[tuple[int, int]]) -> SetFunction:
    """Maximum-cardinality matching cost; players are the edges of the graph.

    On bipartite graphs the matching size is computed with augmenting paths;
    otherwise an exhaustive take-or-skip recursion over edges is used
    (blossom machinery is deliberately out of scope at this scale).
    """
    edge_list = [(int(u), int(v)) for u, v in edges]
    if any(u == v for u, v in edge_list):
        raise ValueError("self-loops are not allowed")
    num_vertices = max((max(u, v) for u, v in edge_list), default=-1) + 1
    colors = _two_color(num_vertices, edge_list)

    conflicts = []
    for i, (u, v) in enumerate(edge_list):
        c = 0
        for k, (a, b) in enumerate(edge_list):
            if k != i and len({u, v, a, b}) < 4:
                c |= 1 << k
        conflicts.append(c)

    def solve_exhaustive(t: int) -> int:
        memo: dict[int, int] = {}

        def rec(mask: int) -> int:
            if mask == 0:
                return 0
            hit = memo.get(mask)
            if hit is not None:
                return hit
            low = mask & -mask
            e = low.bit_length() - 1
            out = max(rec(mask ^ low), 1 + rec(mask & ~low & ~conflicts[e]))
            memo[mask] = out
            return out

        return rec(t)

    def solve_augmenting(t: int) -> int:
        adj: dict[int, list[int]] = {}
        for i in bits(t):
            u, v = edge_list[i]
            left, right = (u, v) if colors[u] == 0 else (v, u)
            adj.setdefault(left, []).append(right)
        match_right: dict[int, int] = {}

        def try_augment(u: int, seen: set[int]) -> bool:
            for w in adj.get(u, ()):
                if w in seen:
                    continue
                seen.add(w)
                if w not in match_right or try_augment(match_right[w], seen):
                    match_right[w] = u
                    return True
            return False

        size = 0
        for u in sorted(adj):
            if try_augment(u, set()):
                size += 1
        return size

    def solve(t: int) -> Rat:
        if colors is not None:
            return Fraction(solve_augmenting(t))
        return Fraction(solve_exhaustive(t))

    return SetFunction.from_oracle(len(edge_list), solve, require_zero_empty=True,
                                   kind="matching",
                                   meta={"edges": edge_list, "bipartite": colors is not None})


def eval_cost(c: SetFunction, player_mask: int) -> Rat:
    """Evaluate a cost function on a player subset."""
    return c(player_mask)


def check_cost_class(c: SetFunction) -> ClassFlags:
    """Exhaustively classify a cost function over players."""
    return classify_set_function(c)


@dataclass(frozen=True)
class AlphaReport:
    """Least parameter satisfying one of the average-cost-share definitions.

    ``alpha`` is None when no finite parameter works. The witness holds the
    subset pair (S, T) for the average-decreasing estimator, the subset (T,)
    for the min/max-bounded ones, and (bundles, T) for the non-separable
    variants. ``exact`` is False when the value is a sampled lower bound.
    """

    alpha: Rat | None
    witness: tuple
    kind: str
    exact: bool = True

    @property
    def unbounded(self) -> bool:
        return self.alpha is None


def alpha_average_decreasing(c: SetFunction) -> AlphaReport:
    """Least a with a*c(S)/|S| >= c(T)/|T| for every nonempty S <= T."""
    n = c.ground_size
    if n > MAX_ESTIMATOR_GROUND:
        raise GroundSetTooLargeError(
            f"average-decreasing estimator limited to n <= {MAX_ESTIMATOR_GROUND}")
    vals = c.to_table()
    size = 1 << n

    # g[T] = min average over nonempty subsets of T, with a witnessing argmin
    avg = [None] * size
    g: list[Rat] = [None] * size
    g_wit = [0] * size
    best = Fraction(1)
    best_wit = (1, 1)
    for t in range(1, size):
        a = vals[t] / t.bit_count()
        avg[t] = a
        gt, wt = a, t
        for e in bits(t):
            prev = t ^ (1 << e)
            if prev and g[prev] < gt:
                gt, wt = g[prev], g_wit[prev]
        g[t] = gt
        g_wit[t] = wt
        if gt == 0:
            if a > 0:
                return AlphaReport(None, (wt, t), "average-decreasing")
            continue
        ratio = a / gt
        if ratio > best:
            best = ratio
            best_wit = (wt, t)
    return AlphaReport(best, best_wit, "average-decreasing")


def _alpha_bounded(c: SetFunction, pick, kind: str) -> AlphaReport:
    n = c.ground_size
    if n > MAX_BOUNDED_GROUND:
        raise GroundSetTooLargeError(
            f"{kind} estimator limited to n <= {MAX_BOUNDED_GROUND}")
    vals = c.to_table()
    size = 1 << n

    extreme: list[Rat] = [None] * size
    best = Fraction(1)
    best_wit = (1,)
    for t in range(1, size):
        low = t & -t
        rest = t ^ low
        standalone = vals[low]
        extreme[t] = standalone if not rest else pick(extreme[rest], standalone)
        if vals[t] == 0:
            if extreme[t] > 0:
                return AlphaReport(None, (t,), kind)
            continue
        ratio = t.bit_count() * extreme[t] / vals[t]
        if ratio > best:
            best = ratio
            best_wit = (t,)
    return AlphaReport(best, best_wit, kind)


def alpha_min_bounded(c: SetFunction) -> AlphaReport:
    """Least a with a*c(T)/|T| >= min standalone cost in T, for every nonempty T."""
    return _alpha_bounded(c, min, "average-min-bounded")


def alpha_max_bounded(c: SetFunction) -> AlphaReport:
    """Least a with a*c(T)/|T| >= max standalone cost in T, for every nonempty T."""
    return _alpha_bounded(c, max, "average-max-bounded")


def _alpha_bounded_ns(C: AllocationCostFn, pick, kind: str,
                      sample: Sequence[Allocation] | None) -> AlphaReport:
    n, m = C.n, C.m
    if sample is None:
        if n * m > MAX_NS_CELLS:
            raise GroundSetTooLargeError(
                f"exhaustive allocation enumeration needs n*m <= {MAX_NS_CELLS}; "
                "pass an allocation sample for larger instances")
        allocs = [Allocation(bundles, m)
                  for bundles in product(range(1 << m), repeat=n)]
        exact = True
    else:
        allocs = list(sample)
        exact = False

    best = Fraction(1)
    best_wit = (Allocation.empty(n, m).bundles, 0)
    for alloc in allocs:
        singles = [C(restrict_allocation(alloc, 1 << i)) for i in range(n)]
        for t in range(1, 1 << n):
            if t.bit_count() < 2:
                continue
            ext = pick(singles[i] for i in bits(t))
            denom = C(restrict_allocation(alloc, t))
            if denom == 0:
                if ext > 0:
                    return AlphaReport(None, (alloc.bundles, t), kind, exact=exact)
                continue
            ratio = t.bit_count() * ext / denom
            if ratio > best:
                best = ratio
                best_wit = (alloc.bundles, t)
    return AlphaReport(best, best_wit, kind, exact=exact)


def alpha_min_bounded_ns(C: AllocationCostFn,
                         sample: Sequence[Allocation] | None = None) -> AlphaReport:
    """Non-separable min-bounded estimator over allocations and |T| >= 2 subsets."""
    return _alpha_bounded_ns(C, min, "average-min-bounded-ns", sample)


def alpha_max_bounded_ns(C: AllocationCostFn,
                         sample: Sequence[Allocation] | None = None) -> AlphaReport:
    """Non-separable max-bounded estimator over allocations and |T| >= 2 subsets."""
    return _alpha_bounded_ns(C, max, "average-max-bounded-ns", sample)


# ---------------------------------------------------------------------------
# Reference cost functions used across the test corpus and generators.

def decreasing_average_table() -> SetFunction:
    """3-player table with weakly decreasing average cost that is neither
    symmetric nor submodular."""
    vals = {0: 0, 0b001: 5, 0b010: 7, 0b100: 8,
            0b011: 10, 0b101: 9, 0b110: 9, 0b111: 11}
    return table_cost([vals[mask] for mask in range(8)])


def two_tier_step_cost(n: int) -> SetFunction:
    """Per-cardinality cost 0, 1, 1, 3, 3, ...: 2-average-decreasing but not
    subadditive."""
    def level(k: int) -> int:
        if k == 0:
            return 0
        return 1 if k <= 2 else 3
    return table_cost([level(mask.bit_count()) for mask in range(1 << n)])


def capped_reciprocal_cost(n: int, k) -> SetFunction:
    """Standalone cost k/(i+1) for player i, capped at k for larger sets.

    1-average-min-bounded; the tight cost model for the sequential
    mechanism's harmonic approximation factor.
    """
    cap = as_rat(k)
    if cap < 0:
        raise ValueError("cap must be non-negative")
    standalone = [cap / (i + 1) for i in range(n)]

    def level(mask: int) -> Rat:
        if mask == 0:
            return Fraction(0)
        return min(cap, sum(standalone[i] for i in bits(mask)))

    return table_cost([level(mask) for mask in range(1 << n)])


def sqrt_player_index(i: int) -> Rat:
    """Rational approximation of sqrt(i+1), accurate to 1/SQRT_SCALE from below."""
    return Fraction(isqrt((i + 1) * SQRT_SCALE ** 2), SQRT_SCALE)


def sqrt_max_cost(n: int) -> SetFunction:
    """Standalone cost ~sqrt(i+1) for player i; cost of a set is the maximum
    standalone cost inside it.

    Escapes both the average-decreasing and the average-min-bounded classes
    for any fixed parameter as n grows. Values are rationalized square roots,
    flagged via ``approximate``.
    """
    standalone = [sqrt_player_index(i) for i in range(n)]

    def level(mask: int) -> Rat:
        if mask == 0:
            return Fraction(0)
        return max(standalone[i] for i in bits(mask))

    vals = [level(mask) for mask in range(1 << n)]
    return SetFunction.from_table(vals, require_zero_empty=True,
                                  kind="table", approximate=True)


def public_good_cost(n: int, price) -> SetFunction:
    """Constant cost for any non-empty served set (public excludable good)."""
    p = as_rat(price)
    return table_cost([Fraction(0) if mask == 0 else p for mask in range(1 << n)])


def additive_cost(weights: Sequence) -> SetFunction:
    ws = [as_rat(w) for w in weights]

    def level(mask: int) -> Rat:
        return sum((ws[i] for i in bits(mask)), start=Fraction(0))

    return table_cost([level(mask) for mask in range(1 << len(ws))])


def symmetric_submodular_cost(n: int, marginals: Sequence) -> SetFunction:
    """Cardinality-based cost with non-increasing marginal costs."""
    margs = [as_rat(d) for d in marginals]
    if len(margs) != n:
        raise ValueError("need one marginal per player")
    if any(margs[t] < margs[t + 1] for t in range(n - 1)) or any(d < 0 for d in margs):
        raise ValueError("marginals must be non-negative and non-increasing")
    prefix = [Fraction(0)]
    for d in margs:
        prefix.append(prefix[-1] + d)
    return table_cost([prefix[mask.bit_count()] for mask in range(1 << n)])


def reference_costs(n: int = 3, k=6) -> dict[str, SetFunction]:
    """Named catalog of the built-in cost functions at the given size."""
    return {
        "decreasing-average": decreasing_average_table(),
        "two-tier-step": two_tier_step_cost(n),
        "capped-reciprocal": capped_reciprocal_cost(n, k),
        "sqrt-max": sqrt_max_cost(n),
        "public-good": public_good_cost(n, k),
    }


# ---------------------------------------------------------------------------
# Non-separable cost builders.

def lifted_separable_cost(sep: SeparableCosts, n: int) -> AllocationCostFn:
    """Wrap separable per-item costs as an opaque allocation cost oracle."""
    m = sep.m

    def fn(bundles: tuple[int, ...]) -> Rat:
        served = Allocation(bundles, m).served()
        return sum((c(t) for c, t in zip(sep.items, served)), start=Fraction(0))

    return AllocationCostFn(n, m, fn, kind="lifted", meta={"separable": sep})


def max_item_cost(sep: SeparableCosts, n: int) -> AllocationCostFn:
    """Cost of an allocation is the most expensive per-item cost it induces."""
    m = sep.m

    def fn(bundles: tuple[int, ...]) -> Rat:
        served = Allocation(bundles, m).served()
        return max(c(t) for c, t in zip(sep.items, served))

    return AllocationCostFn(n, m, fn, kind="max-item", meta={"separable": sep})


def count_served_cost(n: int, m: int, weight=1) -> AllocationCostFn:
    """Flat per-player connection fee: C(A) = weight * |{i : A_i nonempty}|."""
    w = as_rat(weight)

    def fn(bundles: tuple[int, ...]) -> Rat:
        return w * sum(1 for b in bundles if b)

    return AllocationCostFn(n, m, fn, kind="count-served", meta={"weight": w})


def union_items_cost(n: int, m: int, weight=1) -> AllocationCostFn:
    """Per-item provisioning fee: C(A) = weight * |union of all bundles|."""
    w = as_rat(weight)

    def fn(bundles: tuple[int, ...]) -> Rat:
        u = 0
        for b in bundles:
            u |= b
        return w * u.bit_count()

    return AllocationCostFn(n, m, fn, kind="union-items", meta={"weight": w})


NONSEPARABLE_BUILTINS: dict[str, Callable] = {
    "lifted": lifted_separable_cost,
    "max-item": max_item_cost,
    "count-served": count_served_cost,
    "union-items": union_items_cost,
}
