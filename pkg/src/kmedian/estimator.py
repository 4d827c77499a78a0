"""Scikit-learn style estimator wrapping the k-median solvers.

Samples double as clients and candidate facilities (optionally restricted),
so fitting selects k medoids among the input points. Works from raw
coordinates or a precomputed dissimilarity matrix.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils import check_array, check_random_state

from .instance import Instance, KMedianError, cost
from .oracle import brute_force
from .sparsify import solve
from .stars import pseudo_approx


class KMedian(ClusterMixin, BaseEstimator):
    """k-median clustering with a provable approximation pipeline.

    Parameters
    ----------
    n_clusters : facility budget k.
    method : "pipeline" (default, the full approximation), "pseudo" (may
        keep a few extra medoids), or "exact" (brute force; guarded).
    eps : accuracy knob of the approximation pipeline.
    metric : "euclidean" or "precomputed" (X is then a square distance matrix).
    facilities : optional indices restricting which samples may be medoids.
    t_cap : enumeration depth cap of the pipeline.
    trials : randomized-rounding restarts.
    random_state : int seed or numpy RandomState for reproducibility.

    Attributes
    ----------
    medoid_indices_ : indices of the selected samples, ascending.
    labels_ : per-sample index into ``medoid_indices_``.
    inertia_ : total distance of samples to their medoid.
    """

    def __init__(self, n_clusters: int = 8, *, method: str = "pipeline",
                 eps: float = 1.0, metric: str = "euclidean",
                 facilities=None, t_cap: int | None = 1, trials: int = 32,
                 random_state=None):
        self.n_clusters = n_clusters
        self.method = method
        self.eps = eps
        self.metric = metric
        self.facilities = facilities
        self.t_cap = t_cap
        self.trials = trials
        self.random_state = random_state

    def _seed(self) -> int:
        if self.random_state is None or isinstance(self.random_state, (int, np.integer)):
            return int(self.random_state or 0)
        return int(check_random_state(self.random_state).randint(2 ** 31))

    def _build_instance(self, X: np.ndarray) -> tuple[Instance, np.ndarray]:
        n = X.shape[0]
        if self.metric == "precomputed":
            if X.shape[0] != X.shape[1]:
                raise ValueError("precomputed matrix must be square")
            D = X
        elif self.metric == "euclidean":
            diff = X[:, None, :] - X[None, :, :]
            D = np.sqrt((diff * diff).sum(axis=-1))
        else:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.facilities is None:
            fac_idx = np.arange(n)
        else:
            fac_idx = np.asarray(self.facilities, dtype=int)
            if fac_idx.size == 0 or fac_idx.min() < 0 or fac_idx.max() >= n:
                raise ValueError("facilities must index the input samples")
        ids = [str(i) for i in range(n)]
        inst = Instance(
            k=self.n_clusters,
            facilities=[ids[i] for i in fac_idx],
            clients=ids,
            points=ids,
            dist=D,
            name="estimator",
        )
        return inst, fac_idx

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=1)
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be at least 1")
        inst, _ = self._build_instance(X)
        seed = self._seed()
        if self.method == "pipeline":
            chosen = solve(inst, self.eps, seed=seed, t_cap=self.t_cap,
                           trials=self.trials)
        elif self.method == "pseudo":
            chosen = pseudo_approx(inst, self.eps, seed=seed,
                                   trials=self.trials).open
        elif self.method == "exact":
            chosen = brute_force(inst, inst.k).best
        else:
            raise ValueError(f"unknown method {self.method!r}")
        ids = chosen.open if hasattr(chosen, "open") else chosen
        medoids = np.array(sorted(int(i) for i in ids))
        self.medoid_indices_ = medoids
        self._medoid_rows = medoids
        d = inst.dist[:, medoids]
        self.labels_ = d.argmin(axis=1)
        self.inertia_ = float(d.min(axis=1).sum())
        self.n_features_in_ = X.shape[1]
        self._fit_X = X if self.metric == "euclidean" else None
        return self

    def predict(self, X):
        """Nearest-medoid label for new points.

        With ``metric='euclidean'`` X holds coordinates; with
        ``metric='precomputed'`` X holds distances to the training samples.
        """
        if not hasattr(self, "medoid_indices_"):
            raise KMedianError("estimator is not fitted")
        X = check_array(X)
        if self.metric == "precomputed":
            d = X[:, self.medoid_indices_]
        else:
            centers = self._fit_X[self.medoid_indices_]
            diff = X[:, None, :] - centers[None, :, :]
            d = np.sqrt((diff * diff).sum(axis=-1))
        return d.argmin(axis=1)
