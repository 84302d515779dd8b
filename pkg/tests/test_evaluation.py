import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motifembed.evaluation import (
    DEFAULT_LAMBDA_GRID,
    EvalConfig,
    auc,
    auc_pairwise,
    cross_val_auc,
    edge_features_mean,
    evaluate_one_seed,
    fit_logreg,
    make_split,
    run_experiment,
    select_k,
    train_logreg,
    _stratified_folds,
)
from motifembed.generators import complete_graph, cycle_graph, erdos_renyi
from motifembed.pipeline import PipelineConfig

TINY_PIPELINE = PipelineConfig(orbits=(1, 2, 3), max_steps=1, local_rank=4, global_rank=12)


# -------------------------------------------------------------------- split


def test_split_arithmetic_on_ten_edges():
    g = cycle_graph(10)  # exactly 10 edges
    split = make_split(g, 0)
    assert len(split.positives) == 5
    assert len(split.negatives) == 5
    assert split.train_graph.num_edges == 5
    assert split.train_graph.num_nodes == 10


def test_split_partition_and_nonadjacency_invariants():
    g = erdos_renyi(40, 0.15, seed=3)
    split = make_split(g, 7)
    train = split.train_graph
    for u, v in split.positives:
        assert g.has_edge(int(u), int(v))
        assert not train.has_edge(int(u), int(v))
    for u, v in split.negatives:
        assert not g.has_edge(int(u), int(v))
        assert int(u) != int(v)
    held = {tuple(p) for p in map(tuple, split.positives)}
    kept = {tuple(e) for e in train.edges()}
    assert held.isdisjoint(kept)
    assert len(held) + len(kept) == g.num_edges
    neg = {tuple(p) for p in map(tuple, split.negatives)}
    assert len(neg) == len(split.negatives)  # distinct pairs


def test_split_is_deterministic_per_seed():
    g = erdos_renyi(30, 0.2, seed=1)
    a = make_split(g, 5)
    b = make_split(g, 5)
    c = make_split(g, 6)
    assert np.array_equal(a.positives, b.positives)
    assert np.array_equal(a.negatives, b.negatives)
    assert a.train_graph == b.train_graph
    assert not np.array_equal(a.positives, c.positives)


def test_split_rejects_tiny_and_saturated_graphs():
    with pytest.raises(ValueError, match="at least 4"):
        make_split(complete_graph(3), 0)
    with pytest.raises(ValueError, match="dense"):
        make_split(complete_graph(5), 0)


# ----------------------------------------------------------------- features


def test_mean_feature_formula_and_symmetry():
    z = np.array([[1.0, 0.0], [0.0, 1.0], [3.0, 3.0]])
    out = edge_features_mean(z, np.array([[0, 1]]))
    np.testing.assert_allclose(out, [[0.5, 0.5]])
    np.testing.assert_allclose(
        edge_features_mean(z, np.array([[0, 1]])),
        edge_features_mean(z, np.array([[1, 0]])),
    )
    np.testing.assert_allclose(edge_features_mean(z, np.array([[2, 2]])), [[3.0, 3.0]])


def test_mean_feature_rejects_bad_ids():
    z = np.zeros((3, 2))
    with pytest.raises(IndexError):
        edge_features_mean(z, np.array([[0, 3]]))
    with pytest.raises(IndexError):
        edge_features_mean(z, np.array([[-1, 1]]))


# ---------------------------------------------------------------------- auc


def test_auc_frozen_examples():
    assert auc(np.array([0.9, 0.8, 0.2, 0.1]), np.array([1, 1, 0, 0])) == 1.0
    assert auc(np.full(6, 0.3), np.array([1, 1, 1, 0, 0, 0])) == 0.5
    # one tie out of two comparisons: (1 + 0.5) / 2
    assert auc(np.array([0.7, 0.7, 0.1]), np.array([1, 0, 0])) == 0.75


def test_auc_requires_both_classes():
    with pytest.raises(ValueError, match="both classes"):
        auc(np.array([0.1, 0.2]), np.array([1, 1]))
    with pytest.raises(ValueError, match="both classes"):
        auc_pairwise(np.array([0.1, 0.2]), np.array([0, 0]))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_auc_matches_pairwise_oracle(data):
    n = data.draw(st.integers(4, 40))
    scores = np.array(
        data.draw(
            st.lists(
                st.integers(-5, 5).map(float), min_size=n, max_size=n
            )
        )
    )
    labels = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    if labels.sum() in (0, n):
        labels[0] = 1 - labels[0]
    assert abs(auc(scores, labels) - auc_pairwise(scores, labels)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_auc_invariant_under_strictly_monotone_transforms(data):
    n = data.draw(st.integers(4, 30))
    scores = np.array(data.draw(st.lists(st.integers(-50, 50), min_size=n, max_size=n)), dtype=float)
    labels = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    if labels.sum() in (0, n):
        labels[0] = 1 - labels[0]
    base = auc(scores, labels)
    assert auc(3.0 * scores + 7.0, labels) == base
    assert auc(scores**3, labels) == base  # odd power: strictly increasing


# ---------------------------------------------------------------- regression


def separable_toy(n=60, seed=0):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(-3.0, 0.5, n // 2), rng.normal(3.0, 0.5, n // 2)])
    y = np.concatenate([np.zeros(n // 2), np.ones(n // 2)])
    return x.reshape(-1, 1), y


def test_separable_toy_reaches_training_auc_one():
    x, y = separable_toy()
    model = fit_logreg(x, y, 1e-4)
    assert auc(model.decision_scores(x), y) == 1.0


def test_weight_norm_monotone_in_regularization():
    x, y = separable_toy()
    regs = list(DEFAULT_LAMBDA_GRID) + [1e3, 1e4]
    norms = [np.linalg.norm(fit_logreg(x, y, r).weights) for r in regs]
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-3  # heavy shrinkage drives w toward zero


def test_fit_logreg_validates_labels():
    x = np.zeros((4, 1))
    with pytest.raises(ValueError, match="0/1"):
        fit_logreg(x, np.array([0.0, 1.0, 2.0, 0.0]), 0.1)
    with pytest.raises(ValueError, match="both classes"):
        fit_logreg(x, np.ones(4), 0.1)


def test_fit_logreg_converges_on_scaled_features():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(200, 8)) * 0.01  # small-scale columns
    y = (rng.random(200) < 0.5).astype(float)
    model = fit_logreg(x, y, 1e-2)
    assert model.converged
    assert model.iterations < 500


def test_permuted_labels_give_null_cv_auc():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(400, 6))
    y = np.concatenate([np.ones(200), np.zeros(200)])
    rng.shuffle(y)
    score = cross_val_auc(x, y, 1e-2, seed=0)
    assert 0.4 <= score <= 0.6


def test_cross_val_auc_deterministic():
    x, y = separable_toy(n=80, seed=2)
    assert cross_val_auc(x, y, 1e-2, seed=4) == cross_val_auc(x, y, 1e-2, seed=4)


def test_stratified_folds_partition_and_cover_both_classes():
    labels = np.array([1] * 25 + [0] * 35)
    rng = np.random.default_rng(0)
    parts = _stratified_folds(labels, 10, rng)
    seen = np.concatenate(parts)
    assert sorted(seen.tolist()) == list(range(60))
    for part in parts:
        vals = set(labels[part].tolist())
        assert vals == {0, 1}


def test_train_logreg_selects_from_grid_and_fits():
    x, y = separable_toy(n=100, seed=5)
    model = train_logreg(x, y, folds=5, seed=0)
    assert model.reg in DEFAULT_LAMBDA_GRID
    assert auc(model.decision_scores(x), y) == 1.0


def test_train_logreg_rejects_single_class():
    with pytest.raises(ValueError, match="both classes|class"):
        train_logreg(np.zeros((6, 2)), np.ones(6), seed=0)


# ------------------------------------------------------------------ protocol


def test_evaluate_one_seed_deterministic_and_in_range():
    g = erdos_renyi(40, 0.2, seed=13)
    cfg = EvalConfig(pipeline=TINY_PIPELINE, step_grid=(1, 2), n_seeds=1)
    a = evaluate_one_seed(g, cfg, 3)
    b = evaluate_one_seed(g, cfg, 3)
    assert a == b
    assert 0.0 <= a.auc <= 1.0
    assert a.chosen_steps in (1, 2)
    assert a.chosen_lambda in DEFAULT_LAMBDA_GRID


def test_run_experiment_report_shape_and_determinism():
    g = erdos_renyi(35, 0.2, seed=17)
    cfg = EvalConfig(pipeline=TINY_PIPELINE, step_grid=(1,), n_seeds=3, base_seed=2)
    rep1 = run_experiment(g, cfg, config_echo="case")
    rep2 = run_experiment(g, cfg, config_echo="case")
    assert rep1 == rep2
    assert [o.seed for o in rep1.outcomes] == [2, 3, 4]
    aucs = np.array(rep1.aucs)
    assert rep1.mean_auc == pytest.approx(aucs.mean())
    assert rep1.std_auc == pytest.approx(aucs.std())
    assert rep1.config_echo == "case"


def test_select_k_returns_grid_member():
    g = erdos_renyi(35, 0.2, seed=19)
    cfg = EvalConfig(pipeline=TINY_PIPELINE, n_seeds=1)
    assert select_k(g, cfg, 0, step_grid=(2,)) == 2
    assert select_k(g, cfg, 0, step_grid=(1, 2)) in (1, 2)
