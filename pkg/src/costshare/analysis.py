"""Social-cost accounting, exhaustive optima, run reports and the
strategyproofness falsification search."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from math import lcm
from typing import Sequence

import numpy as np

from .core import (Allocation, GroundSetTooLargeError, Instance, Outcome, Rat,
                   Trace, allocation_cost, harmonic)
from .costs import (alpha_max_bounded, alpha_max_bounded_ns, alpha_min_bounded,
                    alpha_min_bounded_ns)
from .mechanisms import (iacsm_run, sm_run, verify_final_set_structure,
                         verify_p1, verify_p2)
from .valuations import (SymmetricSubmodularValuation, TableValuation,
                         ValuationFn, as_rat, value)

MAX_OPTIMUM_CELLS = 20

MECHANISM_IDS = ("iacsm", "sm", "iacsm-underquote")


def _run_mechanism(mechanism: str, inst: Instance,
                   declared: Sequence[ValuationFn] | None = None,
                   order: Sequence[int] | None = None) -> tuple[Outcome, Trace | None]:
    if mechanism == "iacsm":
        return iacsm_run(inst, declared)
    if mechanism == "iacsm-underquote":
        return iacsm_run(inst, declared, first_iteration_quote_scale=Fraction(1, 2))
    if mechanism == "sm":
        return sm_run(inst, order=order, declared=declared), None
    raise ValueError(f"unknown mechanism id {mechanism!r}")


def social_cost(inst: Instance, a: Allocation) -> Rat:
    """Allocation cost plus the total value missed by not serving everything."""
    full = (1 << inst.m) - 1
    missed = sum((value(v, full) - value(v, b)
                  for v, b in zip(inst.valuations, a.bundles)), start=Fraction(0))
    return allocation_cost(inst, a) + missed


def _optimal_enum(inst: Instance) -> tuple[Rat, Allocation]:
    best_val = None
    best = None
    for bundles in product(range(1 << inst.m), repeat=inst.n):
        alloc = Allocation(bundles, inst.m)
        val = social_cost(inst, alloc)
        if best_val is None or val < best_val:
            best_val, best = val, alloc
    return best_val, best


def _optimal_fast_separable(inst: Instance) -> tuple[Rat, Allocation] | None:
    """Vectorized exact minimum over all allocations for separable instances.

    Every value is rescaled to a common-denominator integer, so the argmin is
    exact; returns None when the rescaled values would not fit in int64 with
    summation headroom, in which case the caller falls back to enumeration.
    """
    n, m = inst.n, inst.m
    full = (1 << m) - 1
    loss_tables = []
    for v in inst.valuations:
        top = value(v, full)
        loss_tables.append([top - value(v, b) for b in range(1 << m)])
    cost_tables = [fn.to_table() for fn in inst.cost_model.items]

    denom = 1
    for table in loss_tables + cost_tables:
        for x in table:
            denom = lcm(denom, x.denominator)
    scaled_losses = [[int(x * denom) for x in t] for t in loss_tables]
    scaled_costs = [[int(x * denom) for x in t] for t in cost_tables]
    bound = (sum(max(t) for t in scaled_losses if t)
             + sum(max(t) for t in scaled_costs if t))
    if bound >= (1 << 62):
        return None

    size = 1 << (n * m)
    # player 0 owns the most significant digit so that np.argmin's first
    # minimizer is the lexicographically smallest bundle tuple
    arr = np.arange(size, dtype=np.int64)
    total = np.zeros(size, dtype=np.int64)
    for i in range(n):
        shift = m * (n - 1 - i)
        total += np.array(scaled_losses[i], dtype=np.int64)[(arr >> shift) & full]
    for j in range(m):
        t_index = np.zeros(size, dtype=np.int64)
        for i in range(n):
            shift = m * (n - 1 - i) + j
            t_index |= ((arr >> shift) & 1) << i
        total += np.array(scaled_costs[j], dtype=np.int64)[t_index]

    k = int(np.argmin(total))
    bundles = tuple((k >> (m * (n - 1 - i))) & full for i in range(n))
    return Fraction(int(total[k]), denom), Allocation(bundles, m)


def optimal_social_cost(inst: Instance) -> tuple[Rat, Allocation]:
    """Exact minimum social cost with the lexicographically smallest witness."""
    if inst.n * inst.m > MAX_OPTIMUM_CELLS:
        raise GroundSetTooLargeError(
            f"optimum enumerates (2^m)^n allocations; n*m <= {MAX_OPTIMUM_CELLS} required")
    if inst.is_separable:
        fast = _optimal_fast_separable(inst)
        if fast is not None:
            return fast
    return _optimal_enum(inst)


@dataclass(frozen=True)
class InvariantFlags:
    """Post-run invariant verdicts; trace flags are None for trace-free runs."""

    ir: bool
    npt: bool
    p1: bool | None = None
    p2: bool | None = None
    final_set: bool | None = None

    def all_hold(self) -> bool:
        return all(f is not False for f in (self.ir, self.npt, self.p1,
                                            self.p2, self.final_set))


@dataclass(frozen=True)
class RunReport:
    mechanism: str
    outcome: Outcome
    trace: Trace | None
    cost: Rat
    total_payment: Rat
    budget_ratio: Rat | None
    social_cost: Rat
    optimal_social_cost: Rat | None
    optimal_allocation: Allocation | None
    approx_ratio: Rat | None
    flags: InvariantFlags


def _ratio(numer: Rat, denom: Rat) -> Rat | None:
    if denom == 0:
        return Fraction(1) if numer == 0 else None
    return numer / denom


def evaluate_run(inst: Instance, mechanism: str = "iacsm", *,
                 order: Sequence[int] | None = None,
                 compute_optimum: bool = True) -> RunReport:
    """Run a mechanism truthfully and assemble the full report."""
    outcome, trace = _run_mechanism(mechanism, inst, order=order)
    cost = allocation_cost(inst, outcome.allocation)
    total = outcome.total_payment
    social = social_cost(inst, outcome.allocation)

    optimum = opt_alloc = approx = None
    if compute_optimum:
        optimum, opt_alloc = optimal_social_cost(inst)
        approx = _ratio(social, optimum)

    npt = all(p >= 0 for p in outcome.payments)
    ir = all(p <= value(v, b) for v, b, p in
             zip(inst.valuations, outcome.allocation.bundles, outcome.payments))
    flags = InvariantFlags(
        ir=ir, npt=npt,
        p1=verify_p1(trace) if trace else None,
        p2=verify_p2(outcome, trace) if trace else None,
        final_set=verify_final_set_structure(outcome, trace) if trace else None)

    return RunReport(mechanism=mechanism, outcome=outcome, trace=trace,
                     cost=cost, total_payment=total,
                     budget_ratio=_ratio(total, cost),
                     social_cost=social, optimal_social_cost=optimum,
                     optimal_allocation=opt_alloc, approx_ratio=approx,
                     flags=flags)


@dataclass(frozen=True)
class DeviationWitness:
    """A coalition misreport making every member strictly better off."""

    coalition: tuple[int, ...]
    misreports: tuple[ValuationFn, ...]
    gains: tuple[Rat, ...]


def wgsp_search(inst: Instance, mechanism: str, coalition_max: int,
                misreport_space: Sequence[ValuationFn], *,
                order: Sequence[int] | None = None) -> DeviationWitness | None:
    """Exhaustive falsification of weak group-strategyproofness.

    Tries every coalition up to ``coalition_max`` and every joint misreport
    drawn from ``misreport_space``; utilities are always computed with the
    true valuations and compared exactly. Returns the first witness in
    deterministic enumeration order, or None.
    """
    truth_outcome, _ = _run_mechanism(mechanism, inst, order=order)
    base_util = [value(v, b) - p for v, b, p in
                 zip(inst.valuations, truth_outcome.allocation.bundles,
                     truth_outcome.payments)]

    space = list(misreport_space)
    for size in range(1, coalition_max + 1):
        for coalition in combinations(range(inst.n), size):
            for assignment in product(space, repeat=size):
                declared = list(inst.valuations)
                for member, mis in zip(coalition, assignment):
                    declared[member] = mis
                outcome, _ = _run_mechanism(mechanism, inst, declared=declared,
                                            order=order)
                gains = []
                for member in coalition:
                    u = (value(inst.valuations[member],
                               outcome.allocation.bundles[member])
                         - outcome.payments[member])
                    gain = u - base_util[member]
                    if gain <= 0:
                        break
                    gains.append(gain)
                else:
                    return DeviationWitness(coalition, tuple(assignment),
                                            tuple(gains))
    return None


def symmetric_marginal_space(m: int, grid: Sequence) -> list[SymmetricSubmodularValuation]:
    """All symmetric submodular valuations with m marginals from the grid."""
    choices = sorted({as_rat(g) for g in grid}, reverse=True)
    return [SymmetricSubmodularValuation(margs)
            for margs in combinations_with_replacement(choices, m)]


def table_space(m: int, grid: Sequence) -> list[TableValuation]:
    """All table valuations over m items with values from the grid (tiny grids)."""
    choices = sorted({as_rat(g) for g in grid})
    out = []
    for rest in product(choices, repeat=(1 << m) - 1):
        out.append(TableValuation.from_values((Fraction(0),) + rest))
    return out


def _max_alpha(inst: Instance, estimator, ns_estimator) -> Rat | None:
    if inst.is_separable:
        worst = Fraction(1)
        for fn in inst.cost_model.items:
            rep = estimator(fn)
            if rep.unbounded:
                return None
            worst = max(worst, rep.alpha)
        return worst
    rep = ns_estimator(inst.cost_model)
    return rep.alpha


def check_icb_bound(inst: Instance, order: Sequence[int] | None = None) -> bool:
    """Check the incremental-cost sum at the optimum against both parameter bounds.

    Runs the sequential mechanism, replays each player's optimal-allocation
    bundle against the mechanism's own prefix allocations, and verifies the
    resulting sum is at most alpha*H_n*C(A*) for the min-bounded alpha and at
    most alpha*C(A*) for the max-bounded alpha (when finite).
    """
    n, m = inst.n, inst.m
    seq = list(range(n)) if order is None else list(order)
    outcome = sm_run(inst, order=seq)
    _, opt_alloc = optimal_social_cost(inst)
    opt_cost = allocation_cost(inst, opt_alloc)

    icb_sum = Fraction(0)
    prefix = [0] * n
    for i in seq:
        base = allocation_cost(inst, Allocation(tuple(prefix), m))
        trial = list(prefix)
        trial[i] = opt_alloc.bundles[i]
        icb_sum += allocation_cost(inst, Allocation(tuple(trial), m)) - base
        prefix[i] = outcome.allocation.bundles[i]

    alpha_min = _max_alpha(inst, alpha_min_bounded, alpha_min_bounded_ns)
    alpha_max = _max_alpha(inst, alpha_max_bounded, alpha_max_bounded_ns)
    ok_min = alpha_min is None or icb_sum <= alpha_min * harmonic(n) * opt_cost
    ok_max = alpha_max is None or icb_sum <= alpha_max * opt_cost
    return ok_min and ok_max
