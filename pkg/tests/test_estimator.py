"""The scikit-learn style wrapper around the solvers."""

import numpy as np
import pytest
from sklearn.base import clone

from kmedian import KMedian


def blob_data(seed=0, n=30, dim=2):
    rng = np.random.default_rng(seed)
    return rng.random((n, dim))


def test_fit_sets_the_standard_attributes():
    X = blob_data()
    est = KMedian(n_clusters=4, method="pseudo", random_state=0).fit(X)
    assert est.medoid_indices_.ndim == 1
    assert list(est.medoid_indices_) == sorted(est.medoid_indices_)
    assert est.labels_.shape == (len(X),)
    assert est.labels_.max() < len(est.medoid_indices_)
    assert est.n_features_in_ == 2
    # inertia matches a direct recomputation against the chosen medoids
    centers = X[est.medoid_indices_]
    d = np.sqrt(((X[:, None, :] - centers[None, :, :]) ** 2).sum(-1))
    assert est.inertia_ == pytest.approx(d.min(axis=1).sum())
    assert np.array_equal(est.labels_, d.argmin(axis=1))


def test_predict_on_training_points_matches_labels():
    X = blob_data(3)
    est = KMedian(n_clusters=3, method="pipeline", random_state=1).fit(X)
    assert np.array_equal(est.predict(X), est.labels_)


def test_exact_method_agrees_with_oracle():
    X = blob_data(5, n=12)
    est = KMedian(n_clusters=3, method="exact").fit(X)
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt((diff * diff).sum(-1))
    best = None
    import itertools
    for combo in itertools.combinations(range(len(X)), 3):
        c = D[:, combo].min(axis=1).sum()
        if best is None or c < best[1]:
            best = (combo, c)
    assert est.inertia_ == pytest.approx(best[1])
    assert tuple(est.medoid_indices_) == best[0]


def test_precomputed_metric():
    rng = np.random.default_rng(8)
    pts = rng.random((10, 2))
    D = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    est = KMedian(n_clusters=2, method="exact", metric="precomputed").fit(D)
    assert len(est.medoid_indices_) == 2
    pred = est.predict(D[:4])
    assert np.array_equal(pred, est.labels_[:4])


def test_facility_restriction_limits_medoids():
    X = blob_data(11, n=20)
    allowed = [0, 3, 5, 7, 11, 13]
    est = KMedian(n_clusters=3, method="exact", facilities=allowed).fit(X)
    assert set(est.medoid_indices_) <= set(allowed)


def test_clone_and_params_round_trip():
    est = KMedian(n_clusters=5, method="pseudo", eps=0.5, random_state=42)
    params = est.get_params()
    assert params["n_clusters"] == 5
    assert params["eps"] == 0.5
    copy = clone(est)
    assert copy.get_params() == params


def test_same_seed_same_medoids():
    X = blob_data(21)
    a = KMedian(n_clusters=4, method="pseudo", random_state=7).fit(X)
    b = KMedian(n_clusters=4, method="pseudo", random_state=7).fit(X)
    assert np.array_equal(a.medoid_indices_, b.medoid_indices_)
    c = KMedian(n_clusters=4, method="pseudo",
                random_state=np.random.RandomState(7)).fit(X)
    assert len(c.medoid_indices_) >= 1


def test_rejects_invalid_arguments():
    X = blob_data(2, n=8)
    with pytest.raises(ValueError):
        KMedian(n_clusters=3, method="magic").fit(X)
    with pytest.raises(ValueError):
        KMedian(n_clusters=3, metric="cosine").fit(X)
    with pytest.raises(ValueError):
        KMedian(n_clusters=3, metric="precomputed").fit(X)
    with pytest.raises(ValueError):
        KMedian(n_clusters=3, facilities=[99]).fit(X)
    with pytest.raises(ValueError):
        KMedian(n_clusters=0).fit(X)
    with pytest.raises(Exception):
        KMedian(n_clusters=9).fit(X)  # more clusters than samples


def test_predict_requires_fit():
    with pytest.raises(Exception):
        KMedian(n_clusters=2).predict(blob_data(4))


def test_pipeline_stays_within_its_factor():
    X = blob_data(31, n=14)
    approx = KMedian(n_clusters=3, method="pipeline", random_state=0).fit(X)
    exact = KMedian(n_clusters=3, method="exact").fit(X)
    assert len(approx.medoid_indices_) <= 3
    factor = 1 + np.sqrt(3) + 1
    assert approx.inertia_ <= factor * exact.inertia_ + 1e-9
