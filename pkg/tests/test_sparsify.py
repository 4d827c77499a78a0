"""Density, residual guessing, the shrink transformation, and the solver."""

import math

import numpy as np
import pytest

from conftest import euclid_battery
from kmedian import (FacilitySet, Instance, KMedianError, PipelineParams,
                     brute_force, cball, cost, dense_pair_sequence, density,
                     enumerate_residuals, facility_set, gen_euclidean,
                     gen_gap, is_sparse, pseudo_budget_bound, select_params,
                     solve, solve_detailed, transform)
from kmedian.sparsify import XI, removal_threshold


def line_instance(k, fac_xs, cli_xs):
    xs = list(fac_xs) + list(cli_xs)
    D = np.abs(np.subtract.outer(xs, xs)).astype(float)
    return Instance.from_blocks(k, len(fac_xs), len(cli_xs), D)


@pytest.fixture(scope="module")
def gap3_opt(gap3):
    return brute_force(gap3, 3).best


def test_density_on_gap(gap3, gap3_opt):
    assert sorted(gap3_opt.open) == ["f0", "f1", "f2"]
    # d(f3, opt) = 1 and exactly one client sits inside the third-radius ball
    assert density(gap3, "f3", gap3_opt) == pytest.approx(2 / 3)
    assert density(gap3, "f4", gap3_opt) == pytest.approx(2 / 3)
    for f in gap3_opt.open:
        assert density(gap3, f, gap3_opt) == 0.0


def test_density_empty_ball_is_zero():
    inst = line_instance(1, [0.0, 10.0], [0.0, 0.5])
    opt = brute_force(inst, 1).best
    assert opt.open == {"f0"}
    # f1 is far from opt but no client comes near it
    assert density(inst, "f1", opt) == 0.0


def test_density_unknown_facility(gap3, gap3_opt):
    with pytest.raises(KMedianError):
        density(gap3, "f99", gap3_opt)


def test_is_sparse_thresholds(gap3, gap3_opt):
    ok, witness = is_sparse(gap3, 0.5, gap3_opt)
    assert not ok and witness == "f3"
    ok, _ = is_sparse(gap3, 0.7, gap3_opt)
    assert ok
    ok, _ = is_sparse(gap3, math.inf, gap3_opt)
    assert ok


def test_residuals_zero_depth_is_base(gap3):
    res = list(enumerate_residuals(gap3, 0))
    assert len(res) == 1
    assert res[0].removed_by == ()
    assert res[0].instance is gap3
    with pytest.raises(KMedianError):
        list(enumerate_residuals(gap3, -1))


def test_residual_count_tiny_instance():
    inst = line_instance(1, [0.0, 1.0], [0.0, 1.0])
    res = list(enumerate_residuals(inst, 1))
    # base plus one residual per ordered pair; no ball empties the set
    assert len(res) == 3
    assert {r.kept for r in res} == {("f0", "f1"), ("f0",), ("f1",)}


def test_residuals_cover_the_sparse_guess(gap3, gap3_opt):
    found = None
    for res in enumerate_residuals(gap3, 2):
        if res.kept == ("f0", "f1", "f2"):
            found = res
            break
    assert found is not None
    assert found.removed_by == (("f3", "f0"), ("f4", "f0"))
    sub = found.instance
    # the residual stays opt/t-sparse and keeps the optimum intact
    ok, _ = is_sparse(sub, cost(gap3, gap3_opt) / 2, gap3_opt)
    assert ok
    assert brute_force(sub, sub.k).cost == 2.0


def test_residual_depth_one_count(gap3):
    res = list(enumerate_residuals(gap3, 1))
    assert len(res) == 1 + 5 * 4


def test_dense_pairs_empty_when_nothing_is_dense(gap3, gap3_opt):
    pairs, remaining = dense_pair_sequence(gap3, 2, gap3_opt)
    assert pairs == ()
    assert remaining == gap3.facilities


def test_dense_pairs_pick_the_gap_leaves(gap3, gap3_opt):
    # at t = 4 the threshold drops to 1/2, below the leaf density 2/3
    pairs, remaining = dense_pair_sequence(gap3, 4, gap3_opt)
    assert pairs == (("f3", "f0"), ("f4", "f0"))
    assert remaining == ("f0", "f1", "f2")
    # client balls behind the picks are pairwise disjoint
    balls = [cball(gap3, p, XI * 1.0) for p, _ in pairs]
    assert balls[0] & balls[1] == set()
    with pytest.raises(KMedianError):
        dense_pair_sequence(gap3, 0, gap3_opt)


def test_dense_pairs_properties_on_battery():
    for inst in euclid_battery(10, seed0=610, max_f=8):
        opt = brute_force(inst, inst.k).best
        for t in (2, 4, 8):
            pairs, remaining = dense_pair_sequence(inst, t, opt)
            assert len(pairs) <= t
            assert opt.open <= set(remaining)  # optimum survives the removal
            balls = [cball(inst, p, XI * float(
                inst.dist_ff[inst.fac_pos[p], inst.fac_pos[q]]))
                for p, q in pairs]
            for i in range(len(balls)):
                for j in range(i + 1, len(balls)):
                    assert balls[i] & balls[j] == set()
            sub = inst.restrict_facilities(remaining)
            ok, _ = is_sparse(sub, cost(inst, opt) / t, opt)
            assert ok
            assert brute_force(sub, sub.k).cost == pytest.approx(
                brute_force(inst, inst.k).cost)


def small_params(c=1, t=60, A=None):
    return PipelineParams(eps=1.0, alpha=2.75, c=c, delta=0.1, t=t,
                          sparsity_level=A)


def test_transform_returns_small_sets_unchanged(gap3):
    s = facility_set(gap3, ["f0", "f1", "f2"])
    out = transform(gap3, s, small_params(A=0.5))
    assert out.open == s.open


def test_transform_rejects_oversized_input(gap3):
    too_big = facility_set(gap3, ["f0", "f1", "f2", "f3", "f4"])
    with pytest.raises(KMedianError):
        transform(gap3, too_big, small_params(c=1, A=0.5))


def test_transform_rejects_undersized_t(gap3):
    s = facility_set(gap3, ["f0", "f1", "f2", "f3"])
    with pytest.raises(KMedianError):
        transform(gap3, s, small_params(t=59, A=0.5))
    with pytest.raises(KMedianError):
        removal_threshold(small_params(A=None), 1.0)


def test_transform_drops_one_facility_on_gap(gap3):
    pseudo = facility_set(gap3, ["f0", "f1", "f2", "f3"])
    params = small_params(A=cost(gap3, pseudo) / 60)
    out = transform(gap3, pseudo, params)
    assert len(out.open) <= 3
    realized = cost(gap3, out)
    B = removal_threshold(params, cost(gap3, pseudo))
    opt = brute_force(gap3, 3).cost
    delta = params.delta
    bound = max(cost(gap3, pseudo) + params.c * B,
                (1 + 3 * delta) / (1 - 3 * delta) * opt)
    assert realized <= bound + 1e-9
    assert realized == 2.0


def test_transform_phase_two_guesses_replacements(gap3):
    # a tiny removal threshold stalls phase one above k, forcing the guess
    pseudo = facility_set(gap3, ["f0", "f1", "f2", "f3"])
    params = PipelineParams(eps=1.0, alpha=2.75, c=1, delta=0.1, t=10 ** 6,
                            sparsity_level=1e-9)
    out = transform(gap3, pseudo, params)
    assert sorted(out.open) == ["f0", "f1", "f2"]
    assert cost(gap3, out) == 2.0


def test_select_params_examples():
    p = select_params(3.0, 1, 0.5)
    assert p.delta == pytest.approx(0.125, abs=2e-9)
    p = select_params(1.2, 1, 0.5)
    assert p.delta == pytest.approx(0.2 / 6.6)
    alpha = (1.0 + math.sqrt(3.0) + 0.1) / 2.0
    p = select_params(alpha, 4, 0.5)
    assert p.t >= 2 * 4 / (p.delta * XI) - 1e-9
    assert p.t == math.ceil(4 * alpha * 4 / (0.5 * XI * p.delta) - 1e-9)
    with pytest.raises(KMedianError):
        select_params(1.0, 1, 0.5)
    with pytest.raises(KMedianError):
        select_params(2.0, 1, 0.0)


def test_pseudo_budget_bound_formula():
    a0 = (math.sqrt(3.0) - 1.0) / 4.0
    for eps in (0.5, 1.0, 2.0):
        eta = eps / (1.0 + math.sqrt(3.0))
        want = max(2, 3 * math.ceil(2.0 / (a0 * (1 - a0) * eta) - 1e-9))
        assert pseudo_budget_bound(eps) == want
    with pytest.raises(KMedianError):
        pseudo_budget_bound(0.0)


def test_solve_gap_recovers_the_optimum():
    for k in (3, 4):
        inst = gen_gap(k)
        report = solve_detailed(inst, 1.0, t_cap=2)
        assert report.cost == 2.0
        assert len(report.best) <= k
        assert report.heuristic
        assert report.t_enumerated == 2
        assert report.t > 2
        assert report.n_residuals >= 1


def test_solve_all_facilities_within_budget():
    inst = gen_euclidean(3, 8, 3, seed=9)
    s = solve(inst, 1.0, t_cap=1)
    assert s.open == frozenset(inst.facilities)
    assert cost(inst, s) == brute_force(inst, 3).cost


def test_solve_is_deterministic():
    inst = gen_euclidean(7, 9, 3, seed=31)
    assert solve(inst, 1.0, t_cap=1).open == solve(inst, 1.0, t_cap=1).open


def test_solve_rejects_bad_eps(gap3):
    with pytest.raises(KMedianError):
        solve(gap3, 0.0)
