"""Link-prediction evaluation: edge holdout, negative sampling, mean-operator
edge features, from-scratch L2 logistic regression, rank-based AUC, and the
multi-seed experiment protocol with step-count selection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from motifembed.graph import Graph
from motifembed.pipeline import PipelineConfig, embed_graph

log = logging.getLogger("motifembed.evaluation")

DEFAULT_LAMBDA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)
DEFAULT_STEP_GRID = (1, 2, 3, 4)


# ---------------------------------------------------------------------------
# split construction


@dataclass(frozen=True)
class LinkPredSplit:
    train_graph: Graph
    positives: np.ndarray  # held-out edges, shape (n_pos, 2)
    negatives: np.ndarray  # sampled non-edges, shape (n_pos, 2)
    seed: int


def make_split(g: Graph, seed: int) -> LinkPredSplit:
    """Remove a uniformly random half of the edges as positives and sample an
    equal number of distinct non-adjacent pairs as negatives.

    The train graph keeps every node. Negatives are rejected against the
    ORIGINAL edge set, never against the held-out half.
    """
    m = g.num_edges
    if m < 4:
        raise ValueError("need at least 4 edges to split")
    n_hold = m // 2
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xE0)))
    order = rng.permutation(m)
    held = np.sort(order[:n_hold])
    kept = np.sort(order[n_hold:])
    positives = np.stack([g.edge_u[held], g.edge_v[held]], axis=1)
    train = Graph(
        g.num_nodes, g.edge_u[kept], g.edge_v[kept], labels=g.labels.copy()
    )

    n = g.num_nodes
    total_pairs = n * (n - 1) // 2
    if total_pairs - m < n_hold:
        raise ValueError("graph too dense to sample enough negative pairs")
    chosen: set[tuple[int, int]] = set()
    attempts = 0
    cap = 200 * n_hold + 10_000
    while len(chosen) < n_hold:
        attempts += 1
        if attempts > cap:
            raise ValueError("negative sampling exhausted its attempt budget")
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        pair = (u, v) if u < v else (v, u)
        if pair in chosen or g.has_edge(*pair):
            continue
        chosen.add(pair)
    negatives = np.array(sorted(chosen), dtype=np.int64)
    return LinkPredSplit(train_graph=train, positives=positives, negatives=negatives, seed=seed)


# ---------------------------------------------------------------------------
# edge features


def edge_features_mean(node_vectors: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Feature of pair (i, j) is (vec_i + vec_j) / 2."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.size and pairs.max() >= node_vectors.shape[0]:
        raise IndexError("pair id out of range")
    if pairs.size and pairs.min() < 0:
        raise IndexError("pair id out of range")
    return (node_vectors[pairs[:, 0]] + node_vectors[pairs[:, 1]]) / 2.0


# ---------------------------------------------------------------------------
# AUC


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outranks a random negative; ties count half.

    Rank-based (tie-averaged ranks), O(n log n).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs both classes present")
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(labels.size, dtype=np.float64)
    i = 0
    while i < labels.size:
        j = i
        while j + 1 < labels.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auc_pairwise(scores: np.ndarray, labels: np.ndarray) -> float:
    """O(n^2) comparator used as the oracle for :func:`auc`."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos_scores = scores[labels == 1]
    neg_scores = scores[labels != 1]
    if pos_scores.size == 0 or neg_scores.size == 0:
        raise ValueError("auc needs both classes present")
    total = 0.0
    for p in pos_scores:
        total += float(np.sum(p > neg_scores)) + 0.5 * float(np.sum(p == neg_scores))
    return total / (pos_scores.size * neg_scores.size)


# ---------------------------------------------------------------------------
# logistic regression (from scratch: full-batch gradient descent + backtracking)


@dataclass(frozen=True)
class LogRegModel:
    weights: np.ndarray
    bias: float
    reg: float
    iterations: int
    converged: bool

    def decision_scores(self, features: np.ndarray) -> np.ndarray:
        return expit(features @ self.weights + self.bias)


def _penalized_loss(z, labels, weights, reg):
    # mean of log(1 + exp(z)) - y*z, stable for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z))
    return loss + 0.5 * reg * float(weights @ weights)


def fit_logreg(
    features: np.ndarray,
    labels: np.ndarray,
    reg: float,
    max_iter: int = 500,
    grad_tol: float = 1e-6,
) -> LogRegModel:
    """Minimize mean log-loss + (reg/2)·‖w‖² (bias unregularized).

    Full-batch gradient descent from zero with Armijo backtracking. The
    linear predictor is tracked incrementally, so each backtracking candidate
    costs a vector update rather than a matrix product.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if set(np.unique(labels)) - {0.0, 1.0}:
        raise ValueError("labels must be 0/1")
    if np.unique(labels).size < 2:
        raise ValueError("need both classes to fit")
    n, dim = features.shape
    weights = np.zeros(dim)
    bias = 0.0
    z = np.zeros(n)
    obj = _penalized_loss(z, labels, weights, reg)
    converged = False
    it = 0
    trial = 1.0  # grows with the accepted step so badly scaled features still converge
    for it in range(1, max_iter + 1):
        err = expit(z) - labels
        grad_w = features.T @ err / n + reg * weights
        grad_b = float(err.mean())
        grad_norm_sq = float(grad_w @ grad_w + grad_b * grad_b)
        if np.sqrt(grad_norm_sq) <= grad_tol:
            converged = True
            break
        grad_z = features @ grad_w + grad_b  # predictor moves linearly in the step
        step = trial
        while True:
            cand_w = weights - step * grad_w
            cand_z = z - step * grad_z
            cand_obj = _penalized_loss(cand_z, labels, cand_w, reg)
            # c = 0.25 keeps accepted steps well inside the decrease region;
            # near the boundary the stiffest coordinate would stop contracting
            if cand_obj <= obj - 0.25 * step * grad_norm_sq or step <= 1e-14:
                break
            step *= 0.5
        trial = min(step * 2.0, 1e15)
        weights = cand_w
        bias = bias - step * grad_b
        z = cand_z
        obj = cand_obj
    return LogRegModel(weights=weights, bias=bias, reg=reg, iterations=it, converged=converged)


def _stratified_folds(labels: np.ndarray, folds: int, rng: np.random.Generator):
    """Index folds with both classes spread evenly; fold count shrinks if a
    class has fewer members than requested folds."""
    pos_idx = np.flatnonzero(labels == 1)
    neg_idx = np.flatnonzero(labels != 1)
    folds = max(2, min(folds, pos_idx.size, neg_idx.size))
    pos_idx = rng.permutation(pos_idx)
    neg_idx = rng.permutation(neg_idx)
    return [
        np.concatenate([chunk_p, chunk_n])
        for chunk_p, chunk_n in zip(np.array_split(pos_idx, folds), np.array_split(neg_idx, folds))
    ]


def cross_val_auc(
    features: np.ndarray,
    labels: np.ndarray,
    reg: float,
    folds: int = 10,
    seed: int = 0,
) -> float:
    """Mean held-out-fold AUC of the regularized model."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xCF)))
    parts = _stratified_folds(labels, folds, rng)
    scores = []
    for held in parts:
        mask = np.ones(labels.size, dtype=bool)
        mask[held] = False
        model = fit_logreg(features[mask], labels[mask], reg)
        scores.append(auc(model.decision_scores(features[held]), labels[held]))
    return float(np.mean(scores))


def _selection_subsample(labels: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Stratified index subsample used for hyperparameter selection."""
    pos_idx = rng.permutation(np.flatnonzero(labels == 1))
    neg_idx = rng.permutation(np.flatnonzero(labels != 1))
    take_p = max(2, int(round(fraction * pos_idx.size)))
    take_n = max(2, int(round(fraction * neg_idx.size)))
    return np.sort(np.concatenate([pos_idx[:take_p], neg_idx[:take_n]]))


def train_logreg(
    features: np.ndarray,
    labels: np.ndarray,
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID,
    folds: int = 10,
    seed: int = 0,
) -> LogRegModel:
    """Pick the L2 strength by cross-validated AUC on a 10% stratified
    subsample, then refit on everything."""
    labels = np.asarray(labels, dtype=np.float64)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5E)))
    sub = _selection_subsample(labels, 0.1, rng)
    best_reg, best_score = None, -np.inf
    for reg in lambda_grid:
        score = cross_val_auc(features[sub], labels[sub], reg, folds=folds, seed=seed)
        if score > best_score:
            best_reg, best_score = reg, score
    return fit_logreg(features, labels, best_reg)


# ---------------------------------------------------------------------------
# experiment protocol


@dataclass(frozen=True)
class EvalConfig:
    pipeline: PipelineConfig
    step_grid: tuple[int, ...] | None = None  # None: use pipeline.max_steps as-is
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID
    folds: int = 10
    selection_fraction: float = 0.1
    n_seeds: int = 10
    base_seed: int = 0


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    chosen_steps: int
    chosen_lambda: float
    auc: float


@dataclass(frozen=True)
class EvalReport:
    outcomes: tuple[SeedOutcome, ...]
    mean_auc: float
    std_auc: float
    config_echo: str = ""

    @property
    def aucs(self) -> list[float]:
        return [o.auc for o in self.outcomes]


def _labeled_pairs(split: LinkPredSplit) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.vstack([split.positives, split.negatives])
    labels = np.concatenate(
        [np.ones(len(split.positives)), np.zeros(len(split.negatives))]
    )
    return pairs, labels


def _embed_features(train_graph, pipeline_cfg, pairs, seed):
    cfg = replace(pipeline_cfg, seed=seed)
    result = embed_graph(train_graph, cfg)
    return edge_features_mean(result.embedding.nodes, pairs)


def evaluate_one_seed(g: Graph, cfg: EvalConfig, seed: int) -> SeedOutcome:
    """Split, embed the train graph, select (steps, lambda) on the 10%
    stratified subsample, and report the 10-fold CV AUC over all labeled
    pairs at the chosen setting."""
    split = make_split(g, seed)
    pairs, labels = _labeled_pairs(split)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5B)))
    sub = _selection_subsample(labels, cfg.selection_fraction, rng)

    grid = cfg.step_grid if cfg.step_grid is not None else (cfg.pipeline.max_steps,)
    embed_seed = int(np.random.SeedSequence((cfg.base_seed, seed, 0xEB)).generate_state(1)[0])

    best = None  # (auc, steps, lambda, features)
    for steps in grid:
        features = _embed_features(
            split.train_graph, replace(cfg.pipeline, max_steps=steps), pairs, embed_seed
        )
        for reg in cfg.lambda_grid:
            score = cross_val_auc(
                features[sub], labels[sub], reg, folds=cfg.folds, seed=seed
            )
            # strict > keeps the smallest steps and the first lambda on ties
            if best is None or score > best[0]:
                best = (score, steps, reg, features)

    _, chosen_steps, chosen_lambda, features = best
    final_auc = cross_val_auc(features, labels, chosen_lambda, folds=cfg.folds, seed=seed)
    return SeedOutcome(seed=seed, chosen_steps=chosen_steps, chosen_lambda=chosen_lambda, auc=final_auc)


def select_k(g: Graph, cfg: EvalConfig, seed: int, step_grid: tuple[int, ...] = DEFAULT_STEP_GRID) -> int:
    """Step count the protocol would choose for this graph and seed."""
    outcome = evaluate_one_seed(g, replace(cfg, step_grid=tuple(step_grid)), seed)
    return outcome.chosen_steps


def run_experiment(g: Graph, cfg: EvalConfig, config_echo: str = "") -> EvalReport:
    """The full protocol over ``cfg.n_seeds`` consecutive seeds."""
    outcomes = []
    for offset in range(cfg.n_seeds):
        seed = cfg.base_seed + offset
        outcome = evaluate_one_seed(g, cfg, seed)
        log.info("seed %d: steps=%d lambda=%g auc=%.4f", seed, outcome.chosen_steps, outcome.chosen_lambda, outcome.auc)
        outcomes.append(outcome)
    outcomes.sort(key=lambda o: o.seed)
    aucs = np.array([o.auc for o in outcomes])
    return EvalReport(
        outcomes=tuple(outcomes),
        mean_auc=float(aucs.mean()),
        std_auc=float(aucs.std()),
        config_echo=config_echo,
    )
