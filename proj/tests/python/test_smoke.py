import json
import math

import numpy as np
import pytest

import dphc


def test_affinity_matches_numpy():
    rng = np.random.default_rng(0)
    y = rng.normal(size=(6, 40))
    np.testing.assert_allclose(dphc.affinity_data(y), y @ y.T / 40, rtol=1e-12)
    norms = np.linalg.norm(y, axis=1)
    np.testing.assert_allclose(dphc.affinity_cosine(y), (y @ y.T) / np.outer(norms, norms), rtol=1e-12)


def test_cluster_dot_linkage():
    a = np.array([[5.0, 1.0, 0.0], [1.0, 4.0, 0.5], [0.0, 0.5, 3.0]])
    out = dphc.cluster_dot(a)
    link = out["linkage"]
    assert link.shape == (2, 4)
    assert list(link[0]) == [0.0, 1.0, 1.0, 2.0]
    assert link[1, 2] == pytest.approx(0.25)
    tree = json.loads(out["dendrogram_json"])
    assert tree["orientation"] == "affinity"
    assert len(tree["nodes"]) == 5
    naive = dphc.cluster_dot(a, engine="naive")
    np.testing.assert_array_equal(naive["linkage"], link)


def test_simulate_is_deterministic_and_scores_well():
    a = dphc.simulate("e1", n=60, p=400, seed=3)
    b = dphc.simulate("e1", n=60, p=400, seed=3)
    np.testing.assert_array_equal(a["y"], b["y"])
    assert a["y"].shape == (60, 400)
    est = dphc.cluster(a["y"], "dot")
    mean, stderr, excluded = dphc.score_against_truth(est["dendrogram_json"], a["truth_json"], a["z"])
    assert 0.5 < mean <= 1.0
    assert stderr >= 0.0


def test_tau_b_example():
    assert dphc.kendall_tau_b([1, 1, 2, 3], [1, 2, 3, 4]) == pytest.approx(5 / math.sqrt(30), abs=1e-12)


def test_rank_selection_on_rank_two_data():
    rng = np.random.default_rng(1)
    y = rng.normal(size=(40, 2)) @ rng.normal(size=(2, 30))
    r_hat, curve = dphc.select_rank(y, 6)
    assert r_hat == 2
    assert [r for r, _ in curve] == list(range(1, 7))


def test_errors_are_typed():
    with pytest.raises(dphc.ValidationError):
        dphc.affinity_cosine(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(dphc.ValidationError):
        dphc.cluster(np.ones((3, 2)), "nonsense")
    with pytest.raises(dphc.NumericError):
        dphc.affinity_data(np.array([[1.0, np.nan], [0.0, 1.0]]))
