"""Rounding a bi-point solution into a solution with few extra facilities.

The large side of the bi-point is decomposed into stars around the small
side: each facility of s2 becomes a leaf of its nearest facility in s1.
Rounding then dispatches on the combination weight ``a``:

* heavy s1 weight: just open s1;
* light s1 weight: a fractional-knapsack choice of stars to open whole,
  giving at most 2 extra facilities;
* the middle range: randomized rounding of star groups, giving at most
  3*ceil(2/(a*b*eta)) extra facilities in exchange for a (1+eta) factor.

Every regime preserves star closure: a closed center has all of its leaves
open, so each client always finds a facility within d1(j) + 2*d2(j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bipoint import BiPoint, bipoint_solve
from .instance import (FacilitySet, Instance, KMedianError, cost_by_positions)

ROOT3 = math.sqrt(3.0)
#: above this weight on s1, opening s1 alone is already good enough
OPEN_F1_A_MIN = 2.0 / (1.0 + ROOT3)
#: below this weight the knapsack rounding wins
KNAPSACK_A_MAX = (ROOT3 - 1.0) / 4.0
#: worst-case ratio of the balancing step
BALANCE_RATIO = (1.0 + ROOT3) / 2.0

_EPS = 1e-9


def _ceil(x: float) -> int:
    """Ceiling that forgives float noise just below an integer."""
    return int(math.ceil(x - _EPS))


def _floor(x: float) -> int:
    return int(math.floor(x + _EPS))


@dataclass(frozen=True, eq=False)
class StarDecomposition:
    """The star structure of a nondegenerate bi-point solution.

    ``stars`` maps each center (facility of s1) to its leaves (facilities of
    s2 whose nearest center it is), both in facility-position order. The
    per-client arrays follow the instance's client order: position of the
    nearest center, position of the nearest leaf, and the two distances.
    """

    inst: Instance
    a: float
    b: float
    centers: tuple[str, ...]
    leaves: tuple[str, ...]
    pi: dict[str, str]
    stars: dict[str, tuple[str, ...]]
    i1_pos: np.ndarray
    i2_pos: np.ndarray
    d1_j: np.ndarray
    d2_j: np.ndarray
    d1: float
    d2: float

    def client_info(self, client_id: str) -> tuple[str, str, float, float]:
        """(nearest center, nearest leaf, distance to each) for one client."""
        q = self.inst.clients.index(client_id)
        return (self.inst.facilities[self.i1_pos[q]],
                self.inst.facilities[self.i2_pos[q]],
                float(self.d1_j[q]), float(self.d2_j[q]))


@dataclass(frozen=True, eq=False)
class RoundingOutcome:
    open: FacilitySet
    regime: str  # "open-F1" | "knapsack" | "grouped-random"
    additive_budget: int
    seed: int
    trials: int


def build_stars(inst: Instance, bp: BiPoint) -> StarDecomposition:
    """Attach every facility of s2 to its nearest facility of s1."""
    if bp.degenerate:
        raise KMedianError("no stars for a degenerate bi-point")
    if not len(bp.s1.open) <= inst.k < len(bp.s2.open):
        raise KMedianError("bi-point sides must satisfy |s1| <= k < |s2|")
    c_pos = inst.positions(bp.s1.open)
    l_pos = inst.positions(bp.s2.open)
    Dff = inst.dist_ff
    Dcf = inst.dist_cf

    centers = inst.ids(c_pos)
    leaves = inst.ids(l_pos)
    pi: dict[str, str] = {}
    stars: dict[str, list[str]] = {c: [] for c in centers}
    for lp in l_pos:
        rel = int(np.argmin(Dff[lp, c_pos]))  # first min = lowest position
        center = inst.facilities[c_pos[rel]]
        leaf = inst.facilities[lp]
        pi[leaf] = center
        stars[center].append(leaf)

    rel1 = np.argmin(Dcf[:, c_pos], axis=1)
    rel2 = np.argmin(Dcf[:, l_pos], axis=1)
    i1_pos = c_pos[rel1]
    i2_pos = l_pos[rel2]
    d1_j = Dcf[np.arange(len(inst.clients)), i1_pos]
    d2_j = Dcf[np.arange(len(inst.clients)), i2_pos]
    return StarDecomposition(
        inst=inst, a=bp.a, b=bp.b,
        centers=centers, leaves=leaves,
        pi=pi, stars={c: tuple(v) for c, v in stars.items()},
        i1_pos=i1_pos, i2_pos=i2_pos,
        d1_j=d1_j, d2_j=d2_j,
        d1=float(d1_j.sum()), d2=float(d2_j.sum()),
    )


def round_open_f1(sd: StarDecomposition) -> RoundingOutcome:
    """Open the small side of the bi-point; no extra facilities."""
    return RoundingOutcome(FacilitySet(frozenset(sd.centers)), "open-F1", 0, 0, 0)


def _client_weight_by_leaf(sd: StarDecomposition) -> np.ndarray:
    """Per leaf (in facility-position space): sum of d1+d2 over its clients."""
    w = np.zeros(sd.inst.n_facilities)
    np.add.at(w, sd.i2_pos, sd.d1_j + sd.d2_j)
    return w


def knapsack_lp(sd: StarDecomposition, k: int) -> tuple[dict[str, float], float]:
    """Fractional choice of stars to open whole, under the budget k - |s1|.

    Opening star S_i whole swaps one center for |S_i| leaves (weight
    |S_i| - 1) and saves d1(j) + d2(j) for each client attached to its
    leaves. Empty stars get x = 1 outright: closing their center frees
    budget and costs nothing. The greedy ratio order solves the LP with at
    most one fractional variable, and x_i = b for all i is feasible, so the
    optimum is at least b*(d1 + d2).
    """
    budget = float(k - len(sd.centers))
    if budget < 0:
        raise KMedianError("bi-point small side exceeds the facility budget")
    leaf_w = _client_weight_by_leaf(sd)
    save = {c: float(sum(leaf_w[sd.inst.fac_pos[l]] for l in sd.stars[c]))
            for c in sd.centers}
    x: dict[str, float] = {}
    heavy = []
    for c in sd.centers:
        w = len(sd.stars[c]) - 1
        if w <= 0:
            x[c] = 1.0
            budget -= w
        else:
            heavy.append((save[c] / w, c, w))
    heavy.sort(key=lambda t: (-t[0], sd.inst.fac_pos[t[1]]))
    for _, c, w in heavy:
        if budget <= 0:
            x[c] = 0.0
        elif w <= budget:
            x[c] = 1.0
            budget -= w
        else:
            x[c] = budget / w
            budget = 0.0
    value = sum(save[c] * x[c] for c in sd.centers)
    return x, value


def round_knapsack(sd: StarDecomposition, k: int) -> RoundingOutcome:
    """Round the star knapsack LP; at most 2 facilities beyond k.

    Integral stars open exactly as the LP says. For the single fractional
    star both its center and the ceil(x*|S_i|) most valuable leaves open,
    so the realized saving is at least the LP value.
    """
    x, _ = knapsack_lp(sd, k)
    leaf_w = _client_weight_by_leaf(sd)
    open_ids: set[str] = set()
    for c in sd.centers:
        leaves = sd.stars[c]
        if x[c] >= 1.0:
            open_ids.update(leaves)  # center closed, star opened whole
        elif x[c] <= 0.0:
            open_ids.add(c)
        else:
            open_ids.add(c)
            take = _ceil(x[c] * len(leaves))
            ranked = sorted(leaves,
                            key=lambda l: (-leaf_w[sd.inst.fac_pos[l]],
                                           sd.inst.fac_pos[l]))
            open_ids.update(ranked[:take])
    return RoundingOutcome(FacilitySet(frozenset(open_ids)), "knapsack", 2, 0, 0)


def grouped_budget(a: float, b: float, eta: float) -> int:
    """The extra-facility allowance of the grouped rounding."""
    return 3 * _ceil(2.0 / (a * b * eta))


def round_grouped(sd: StarDecomposition, k: int, eta: float,
                  seed: int) -> RoundingOutcome:
    """Randomized star rounding for the middle range of ``a``.

    Large stars (size >= 2/(a*b*eta)) open their center plus a uniform
    sample of floor(b*(size-1)) leaves. Small stars are grouped by exact
    size; within a group of m stars a random permutation opens the centers
    of the first ceil(a*m)+1 stars and all leaves of the rest, topped up
    with extra leaves inside the center-opened stars so the expected number
    of open leaves per group is exactly b*size*m. All randomness comes from
    one seeded generator, so a (decomposition, k, eta, seed) tuple fully
    determines the outcome.
    """
    if eta <= 0:
        raise KMedianError("eta must be positive")
    a, b = sd.a, sd.b
    threshold = 2.0 / (a * b * eta)
    rng = np.random.default_rng(seed)
    open_ids: set[str] = set()
    small: dict[int, list[str]] = {}
    for c in sd.centers:
        leaves = sd.stars[c]
        if len(leaves) >= threshold - _EPS:
            open_ids.add(c)
            take = _floor(b * (len(leaves) - 1))
            if take > 0:
                picked = rng.choice(len(leaves), size=take, replace=False)
                open_ids.update(leaves[i] for i in picked)
        else:
            small.setdefault(len(leaves), []).append(c)

    for h in sorted(small):
        group = small[h]
        m = len(group)
        perm = rng.permutation(m)
        q = min(_ceil(a * m) + 1, m)
        head = [group[i] for i in perm[:q]]
        tail = [group[i] for i in perm[q:]]
        open_ids.update(head)
        pool: list[str] = []
        for c in head:
            pool.extend(sd.stars[c])
        for c in tail:
            open_ids.update(sd.stars[c])
        want = b * h * m - (m - q) * h
        want = min(max(want, 0.0), float(len(pool)))
        low = _floor(want)
        frac = want - low
        extra = low
        if frac > _EPS and rng.random() >= math.ceil(want) - want:
            extra = low + 1
        extra = min(extra, len(pool))
        if extra > 0:
            picked = rng.choice(len(pool), size=extra, replace=False)
            open_ids.update(pool[i] for i in picked)

    return RoundingOutcome(FacilitySet(frozenset(open_ids)), "grouped-random",
                           grouped_budget(a, b, eta), seed, 1)


def check_balance(a: float, b: float, d1: float, d2: float) -> None:
    """The better of 'open s1' and the grouped bound is within (1+sqrt(3))/2
    of the fractional cost; this is pure arithmetic and must never fail."""
    lhs = min(d1, a * d1 + b * (1.0 + 2.0 * a) * d2)
    rhs = BALANCE_RATIO * (a * d1 + b * d2) + 1e-9
    if lhs > rhs:
        raise AssertionError(
            f"balancing inequality violated: {lhs!r} > {rhs!r} "
            f"(a={a!r}, b={b!r}, d1={d1!r}, d2={d2!r})")


def _outcome_cost(inst: Instance, out: RoundingOutcome) -> float:
    return cost_by_positions(inst, inst.positions(out.open.open))


def pseudo_approx(inst: Instance, eps: float, seed: int = 0,
                  trials: int = 32) -> RoundingOutcome:
    """Best pseudo-solution from the bi-point, by regime dispatch.

    Degenerate bi-points short-circuit to their single facility set. When
    the large side is more expensive than the small one, or the small side
    carries enough weight, s1 alone is returned. Otherwise the knapsack or
    grouped rounding runs (the latter ``trials`` times with consecutive
    seeds, keeping the cheapest outcome) and the result is compared against
    plain s1 one more time, returning the cheaper of the two.
    """
    if eps <= 0:
        raise KMedianError("eps must be positive")
    if trials < 1:
        raise KMedianError("trials must be at least 1")
    bp = bipoint_solve(inst)
    if bp.degenerate:
        return RoundingOutcome(bp.s1, "open-F1", 0, seed, 0)
    sd = build_stars(inst, bp)
    check_balance(sd.a, sd.b, sd.d1, sd.d2)
    f1 = round_open_f1(sd)
    if sd.d2 > sd.d1 or sd.a > OPEN_F1_A_MIN:
        return f1
    if sd.a <= KNAPSACK_A_MAX:
        alt = round_knapsack(sd, inst.k)
    else:
        eta = eps / (1.0 + ROOT3)
        alt = None
        alt_cost = math.inf
        for t in range(trials):
            out = round_grouped(sd, inst.k, eta, seed + t)
            c = _outcome_cost(inst, out)
            if c < alt_cost:
                alt, alt_cost = out, c
        alt = RoundingOutcome(alt.open, alt.regime, alt.additive_budget,
                              alt.seed, trials)
    if _outcome_cost(inst, alt) < _outcome_cost(inst, f1):
        return alt
    return f1
