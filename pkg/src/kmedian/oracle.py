"""Exact reference solver: exhaustive search over fixed-size facility sets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .instance import FacilitySet, Instance, KMedianError, cost_by_positions


class GuardExceeded(KMedianError):
    """The enumeration would be too large to run."""


ENUMERATION_LIMIT = 10_000_000


@dataclass(frozen=True)
class OracleResult:
    best: FacilitySet
    cost: float
    enumerated: int


def brute_force(inst: Instance, size: int) -> OracleResult:
    """Cheapest facility set of exactly ``size``, by full enumeration.

    Cost is monotone under adding facilities, so this is also the optimum
    over sets of size at most ``size``. Ties resolve to the set that is
    lexicographically smallest in facility positions (the enumeration
    order of itertools.combinations).
    """
    n = inst.n_facilities
    if not 1 <= size <= n:
        raise KMedianError(f"size must be between 1 and {n}, got {size}")
    total = math.comb(n, size)
    if total > ENUMERATION_LIMIT:
        raise GuardExceeded(
            f"brute force would enumerate {total} subsets "
            f"(limit {ENUMERATION_LIMIT})")

    D = inst.dist_cf
    best_cost = math.inf
    best_pos: tuple[int, ...] | None = None
    for pos in combinations(range(n), size):
        c = float(D[:, pos].min(axis=1).sum())
        if c < best_cost:
            best_cost = c
            best_pos = pos
    assert best_pos is not None
    assert best_cost == cost_by_positions(inst, list(best_pos))
    return OracleResult(FacilitySet(frozenset(inst.ids(best_pos))), best_cost, total)


def best_additive(inst: Instance, c: int) -> OracleResult:
    """Optimum when ``c`` extra facilities beyond ``k`` may be opened."""
    if c < 0:
        raise KMedianError("additive allowance must be nonnegative")
    return brute_force(inst, min(inst.k + c, inst.n_facilities))
