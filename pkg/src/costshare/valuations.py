"""Valuation models and exhaustive set-function class checkers."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence, Union

import numpy as np

from .core import (GroundSetTooLargeError, Rat, SetFunction, as_rat)

MAX_CLASSIFY_GROUND = 16


@dataclass(frozen=True)
class SymmetricSubmodularValuation:
    """Value depends only on bundle size: v(S) = sum of the first |S| marginals.

    Marginals must be non-increasing and non-negative, which is exactly
    submodularity for cardinality-based functions.
    """

    marginals: tuple[Rat, ...]

    def __post_init__(self):
        margs = tuple(as_rat(d) for d in self.marginals)
        object.__setattr__(self, "marginals", margs)
        if any(d < 0 for d in margs):
            raise ValueError("marginals must be non-negative")
        if any(margs[t] < margs[t + 1] for t in range(len(margs) - 1)):
            raise ValueError("marginals must be non-increasing")
        prefix = [Fraction(0)]
        for d in margs:
            prefix.append(prefix[-1] + d)
        object.__setattr__(self, "_prefix", tuple(prefix))

    @property
    def m(self) -> int:
        return len(self.marginals)

    def value_of_size(self, k: int) -> Rat:
        return self._prefix[k]

    def value(self, item_mask: int) -> Rat:
        if item_mask < 0 or item_mask >> self.m:
            raise ValueError("item mask outside the item ground set")
        return self._prefix[item_mask.bit_count()]


@dataclass(frozen=True)
class TableValuation:
    """Arbitrary valuation given as a dense table over item subsets.

    Monotonicity is not required. v(empty) = 0 is required as a
    normalization convention.
    """

    fn: SetFunction

    def __post_init__(self):
        if self.fn(0) != 0:
            raise ValueError("table valuations must satisfy v(empty) = 0")

    @property
    def m(self) -> int:
        return self.fn.ground_size

    def value(self, item_mask: int) -> Rat:
        return self.fn(item_mask)

    @classmethod
    def from_values(cls, values: Sequence) -> "TableValuation":
        return cls(SetFunction.from_table(values))


ValuationFn = Union[SymmetricSubmodularValuation, TableValuation]


def value(v: ValuationFn, item_mask: int) -> Rat:
    """Evaluate a valuation on an item subset."""
    return v.value(item_mask)


def as_table(v: ValuationFn) -> TableValuation:
    """Materialize any valuation as a dense table (used by the class checkers)."""
    if isinstance(v, TableValuation):
        return v
    vals = [v.value(mask) for mask in range(1 << v.m)]
    return TableValuation(SetFunction.from_table(vals))


@dataclass(frozen=True)
class ClassFlags:
    nondecreasing: bool
    submodular: bool
    symmetric: bool
    xos_symmetric: bool
    subadditive: bool


def _scaled_ints(vals: list[Rat]) -> list[int] | None:
    """Common-denominator integer rescaling, or None if it would not fit int64.

    Multiplying every value by the same positive integer preserves all the
    order comparisons the class checkers make, so the checks stay exact.
    """
    denom = 1
    for v in vals:
        denom = lcm(denom, v.denominator)
    scaled = [v.numerator * (denom // v.denominator) for v in vals]
    # headroom for one addition inside the subadditivity comparison
    if max((abs(s) for s in scaled), default=0) >= (1 << 61):
        return None
    return scaled


def classify_set_function(fn: SetFunction) -> ClassFlags:
    """Decide the standard function classes by exhaustive check of each definition."""
    n = fn.ground_size
    if n > MAX_CLASSIFY_GROUND:
        raise GroundSetTooLargeError(
            f"class checks are exhaustive and limited to ground_size <= {MAX_CLASSIFY_GROUND}")
    vals = fn.to_table()
    size = 1 << n

    scaled = _scaled_ints(vals)
    if scaled is not None:
        arr = np.array(scaled, dtype=np.int64)
        idx = np.arange(size, dtype=np.int64)
        nondec = all(
            bool(np.all(arr[(idx | (1 << i))[(idx >> i) & 1 == 0]]
                        >= arr[(idx >> i) & 1 == 0]))
            for i in range(n))
        submod = True
        for i in range(n):
            for j in range(i + 1, n):
                both = (1 << i) | (1 << j)
                base = idx[(idx & both) == 0]
                if not np.all(arr[base | (1 << i)] - arr[base]
                              >= arr[base | both] - arr[base | (1 << j)]):
                    submod = False
                    break
            if not submod:
                break
        subadd = True
        for s in range(size):
            t = idx[s:]
            if not np.all(arr[s] + arr[s:] >= arr[t | s]):
                subadd = False
                break
    else:
        nondec = all(vals[s | (1 << i)] >= vals[s]
                     for s in range(size) for i in range(n) if not (s >> i) & 1)
        submod = all(
            vals[s | (1 << i)] - vals[s] >= vals[s | (1 << i) | (1 << j)] - vals[s | (1 << j)]
            for s in range(size)
            for i in range(n) if not (s >> i) & 1
            for j in range(n) if j != i and not (s >> j) & 1)
        subadd = all(vals[s] + vals[t] >= vals[s | t]
                     for s in range(size) for t in range(s, size))

    by_card: list[list[Rat]] = [[] for _ in range(n + 1)]
    for mask in range(size):
        by_card[mask.bit_count()].append(vals[mask])
    symmetric = all(len(set(group)) <= 1 for group in by_card if group)

    xos_sym = symmetric
    if symmetric and n >= 1:
        averages = [by_card[k][0] / k for k in range(1, n + 1)]
        xos_sym = all(averages[t] >= averages[t + 1] for t in range(len(averages) - 1))

    return ClassFlags(nondecreasing=nondec, submodular=submod, symmetric=symmetric,
                      xos_symmetric=xos_sym, subadditive=subadd)


def check_class(v: ValuationFn) -> ClassFlags:
    """Exhaustively classify a valuation (ground set of items)."""
    return classify_set_function(as_table(v).fn)


def gen_symmetric_submodular(m: int, grid: Sequence, seed: int) -> SymmetricSubmodularValuation:
    """Draw m marginals uniformly from ``grid`` and sort them non-increasing."""
    choices = [as_rat(g) for g in grid]
    if not choices:
        raise ValueError("marginal grid must be non-empty")
    if any(g < 0 for g in choices):
        raise ValueError("marginal grid values must be non-negative")
    rng = random.Random(seed)
    draws = sorted((rng.choice(choices) for _ in range(m)), reverse=True)
    return SymmetricSubmodularValuation(tuple(draws))
