"""Shared fixtures and instance batteries for the test suite."""

import pytest

from kmedian import gen_euclidean, gen_gap


@pytest.fixture(scope="session")
def gap3():
    return gen_gap(3)


@pytest.fixture(scope="session")
def gap4():
    return gen_gap(4)


def euclid_battery(count, seed0=0, max_f=10, max_c=15, max_k=4):
    """Small random instances with sizes cycling through the given ranges.

    Sizes stay within brute-force reach so every instance can be checked
    against the exact optimum.
    """
    out = []
    for s in range(count):
        nf = 4 + (s * 3) % (max_f - 3)
        nc = 5 + (s * 5) % (max_c - 4)
        k = 2 + s % min(max_k - 1, nf - 2)
        out.append(gen_euclidean(nf, nc, k, dim=2, seed=seed0 + s))
    return out


def scan_cost(inst, open_ids):
    """Independent cost recomputation: exhaustive nearest scan, pure Python."""
    pts = list(inst.points)
    rows = {p: i for i, p in enumerate(pts)}
    total = 0.0
    for c in inst.clients:
        total += min(float(inst.dist[rows[c], rows[f]]) for f in open_ids)
    return total
