"""Motif-weighted matrices: build a sparse weight matrix from per-edge orbit
counts, apply the five matrix kinds (weighted graph, transition, Laplacian
and its two normalized forms), and the averaged/decayed multi-step variants.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from motifembed.graph import Graph
from motifembed.orbits import EdgeOrbitCounts

_ACCUMULATE_NODE_CAP = 20_000
_DENSE_ACCUMULATE_NODES = 4_000


class MotifMatrixKind(Enum):
    """The five matrix functions applied to a motif weight matrix W.

    Values are the CLI tokens: plain weights, row-stochastic transition
    D^-1 W, combinatorial Laplacian D - W, symmetric normalized Laplacian
    I - D^-1/2 W D^-1/2, and random-walk Laplacian I - D^-1 W.
    """

    WEIGHTED_GRAPH = "w"
    TRANSITION = "p"
    LAPLACIAN = "l"
    NORMALIZED_LAPLACIAN = "lnorm"
    RANDOM_WALK_LAPLACIAN = "lrw"


SYMMETRIC_KINDS = frozenset(
    {
        MotifMatrixKind.WEIGHTED_GRAPH,
        MotifMatrixKind.LAPLACIAN,
        MotifMatrixKind.NORMALIZED_LAPLACIAN,
    }
)


class AccumulationMode(Enum):
    AVERAGE_POWERS = "average-powers"
    DECAYED_SUM = "decayed-sum"


@dataclass(frozen=True)
class AccumulationSpec:
    steps: int
    alpha: float = 1.0
    mode: AccumulationMode = AccumulationMode.AVERAGE_POWERS

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")


@dataclass(frozen=True)
class MotifWeightedGraph:
    """Sparse symmetric non-negative weight matrix for one orbit.

    An entry (i, j) is present iff the orbit count on edge (i, j) is at least
    ``delta``, and then equals that count. ``is_empty`` flags the all-zero
    case (no edge met the threshold); downstream keeps such blocks as zeros.
    """

    matrix: sp.csr_matrix
    orbit: int
    delta: int
    is_empty: bool

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]


def build_motif_weight_matrix(
    g: Graph, counts: EdgeOrbitCounts, orbit: int, delta: int = 1
) -> MotifWeightedGraph:
    """Threshold one orbit's per-edge counts into a weight matrix."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if counts.graph_fingerprint != g.fingerprint():
        raise ValueError("orbit counts were computed for a different graph")
    col = counts.orbit_column(orbit)
    keep = col >= delta
    u = g.edge_u[keep]
    v = g.edge_v[keep]
    w = col[keep].astype(np.float64)
    n = g.num_nodes
    mat = sp.coo_matrix(
        (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
        shape=(n, n),
    ).tocsr()
    return MotifWeightedGraph(matrix=mat, orbit=orbit, delta=delta, is_empty=not bool(keep.any()))


def motif_degrees(wg: MotifWeightedGraph | sp.spmatrix) -> np.ndarray:
    """Row sums of the weight matrix (total motif mass incident per node)."""
    mat = wg.matrix if isinstance(wg, MotifWeightedGraph) else wg
    return np.asarray(mat.sum(axis=1)).ravel()


def _kind_from_sparse(mat: sp.csr_matrix, kind: MotifMatrixKind) -> sp.csr_matrix:
    """Apply one matrix kind to an already-built sparse weight matrix.

    Nodes with zero row sum get an all-zero row for every kind, including a
    zero diagonal entry in both normalized Laplacians.
    """
    n = mat.shape[0]
    if kind is MotifMatrixKind.WEIGHTED_GRAPH:
        return mat.copy()
    deg = np.asarray(mat.sum(axis=1)).ravel()
    nz = deg > 0
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=nz)
    if kind is MotifMatrixKind.TRANSITION:
        return (sp.diags(inv) @ mat).tocsr()
    if kind is MotifMatrixKind.LAPLACIAN:
        return (sp.diags(deg) - mat).tocsr()
    if kind is MotifMatrixKind.NORMALIZED_LAPLACIAN:
        half = sp.diags(np.sqrt(inv))
        return (sp.diags(nz.astype(np.float64)) - half @ mat @ half).tocsr()
    if kind is MotifMatrixKind.RANDOM_WALK_LAPLACIAN:
        return (sp.diags(nz.astype(np.float64)) - sp.diags(inv) @ mat).tocsr()
    raise ValueError(f"unknown kind {kind!r}")


def apply_matrix_kind(wg: MotifWeightedGraph, kind: MotifMatrixKind) -> sp.csr_matrix:
    """Turn a motif weight matrix into the requested matrix kind."""
    return _kind_from_sparse(wg.matrix, kind)


def accumulate(
    wg: MotifWeightedGraph,
    kind: MotifMatrixKind,
    spec: AccumulationSpec,
    node_cap: int = _ACCUMULATE_NODE_CAP,
):
    """Materialized multi-step combination over steps 1..K.

    AVERAGE_POWERS: mean of M^l for M the weight or transition matrix (the
    only kinds whose powers are meaningful to average directly).
    DECAYED_SUM: mean of alpha^l * kind(W^l), rebuilding degrees from each
    power's row sums.

    Small inputs are computed densely; beyond ``node_cap`` nodes this errors
    and callers should switch to the implicit operator form.
    """
    n = wg.num_nodes
    if n > node_cap:
        raise ValueError(
            f"{n} nodes exceeds the materialization cap {node_cap}; use KStepOperator instead"
        )
    if spec.mode is AccumulationMode.AVERAGE_POWERS:
        if kind not in (MotifMatrixKind.WEIGHTED_GRAPH, MotifMatrixKind.TRANSITION):
            raise ValueError("average-powers is defined for the w and p kinds only")
        base = _kind_from_sparse(wg.matrix, kind)
        if n <= _DENSE_ACCUMULATE_NODES:
            base = base.toarray()
        power = base.copy()
        acc = base.copy()
        for _ in range(spec.steps - 1):
            power = power @ base
            acc = acc + power
        return acc / spec.steps

    weight = wg.matrix.toarray() if n <= _DENSE_ACCUMULATE_NODES else wg.matrix
    power = weight.copy()
    acc = spec.alpha * _apply_kind_any(power, kind)
    for step in range(2, spec.steps + 1):
        power = power @ weight
        acc = acc + spec.alpha**step * _apply_kind_any(power, kind)
    return acc / spec.steps


def _apply_kind_any(mat, kind: MotifMatrixKind):
    """Kind application that accepts dense or sparse input."""
    if sp.issparse(mat):
        return _kind_from_sparse(mat.tocsr(), kind)
    n = mat.shape[0]
    if kind is MotifMatrixKind.WEIGHTED_GRAPH:
        return mat.copy()
    deg = mat.sum(axis=1)
    nz = deg > 0
    inv = np.divide(1.0, deg, out=np.zeros_like(deg), where=nz)
    if kind is MotifMatrixKind.TRANSITION:
        return inv[:, None] * mat
    if kind is MotifMatrixKind.LAPLACIAN:
        return np.diag(deg) - mat
    if kind is MotifMatrixKind.NORMALIZED_LAPLACIAN:
        half = np.sqrt(inv)
        return np.diag(nz.astype(np.float64)) - half[:, None] * mat * half[None, :]
    if kind is MotifMatrixKind.RANDOM_WALK_LAPLACIAN:
        return np.diag(nz.astype(np.float64)) - inv[:, None] * mat
    raise ValueError(f"unknown kind {kind!r}")
