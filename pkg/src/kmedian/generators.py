"""Instance generators for tests and experiments."""

from __future__ import annotations

import numpy as np

from .instance import Instance, KMedianError


def gen_gap(k: int) -> Instance:
    """The integrality-gap family: a hub with k+1 unit spokes.

    Facilities are a hub f0 plus k+1 spoke tips f1..f{k+1}; one client sits
    on every tip. Tip-to-tip distances are 2 (through the hub). The best k
    tips leave one client at distance 2, so the optimal k-set costs exactly
    2, while opening one extra facility drops the cost to 0. The fractional
    optimum 1 + 1/k is recorded in ``meta['lp_reference']``.
    """
    if k < 2:
        raise KMedianError("gap instance needs k >= 2")
    n_leaf = k + 1
    fac = ["f0"] + [f"f{i}" for i in range(1, n_leaf + 1)]
    cli = [f"c{i}" for i in range(1, n_leaf + 1)]
    points = fac + cli
    n = len(points)
    # location of each point on the star: hub or a tip index
    tip = {"f0": 0}
    for i in range(1, n_leaf + 1):
        tip[f"f{i}"] = i
        tip[f"c{i}"] = i
    D = np.zeros((n, n))
    for a, p in enumerate(points):
        for b, q in enumerate(points):
            ta, tb = tip[p], tip[q]
            if ta == tb:
                D[a, b] = 0.0
            elif ta == 0 or tb == 0:
                D[a, b] = 1.0
            else:
                D[a, b] = 2.0
    return Instance(k=k, facilities=fac, clients=cli, points=points, dist=D,
                    name=f"gap-k{k}", meta={"lp_reference": 1.0 + 1.0 / k})


def gen_euclidean(n_fac: int, n_cli: int, k: int, dim: int = 2,
                  seed: int = 0) -> Instance:
    """Uniform random points in the unit cube; deterministic per seed."""
    if dim not in (1, 2, 3):
        raise KMedianError("dim must be 1, 2 or 3")
    if n_fac < 1 or n_cli < 1:
        raise KMedianError("need at least one facility and one client")
    rng = np.random.default_rng(seed)
    pts = rng.random((n_fac + n_cli, dim))
    diff = pts[:, None, :] - pts[None, :, :]
    D = np.sqrt((diff * diff).sum(axis=-1))
    name = f"euclid-f{n_fac}-c{n_cli}-k{k}-d{dim}-s{seed}"
    inst = Instance.from_blocks(k, n_fac, n_cli, D, name=name)
    inst.meta["coords"] = pts
    return inst
