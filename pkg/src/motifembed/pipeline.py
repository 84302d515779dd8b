"""End-to-end embedding pipeline.

For every (step k, orbit t) pair: threshold the orbit's counts into a weight
matrix, wrap the implicit k-step operator for the configured matrix kind,
factorize it at the local rank, and column-normalize the left factors. The
blocks are concatenated side by side in k-major order (all orbits for k=1,
then k=2, ...), optionally followed by diffused node features, and the
resulting wide matrix is factorized once more at the global rank. Rows of
the global left factor are the node embeddings.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.sparse as sp

from motifembed.factorize import (
    FactorizeConfig,
    FactorizeMethod,
    CcdOptions,
    ccd_factorize,
    normalize_columns,
    randomized_low_rank,
)
from motifembed.graph import Graph
from motifembed.matrices import MotifMatrixKind, MotifWeightedGraph, build_motif_weight_matrix
from motifembed.operators import KStepOperator
from motifembed.orbits import NUM_ORBITS, EdgeOrbitCounts, count_edge_orbits, node_motif_features

log = logging.getLogger("motifembed.pipeline")

ALL_ORBITS = tuple(range(1, NUM_ORBITS + 1))


class DiffusionVariant(Enum):
    LINEAR = "linear"  # step l multiplies by kind(W^l)
    TRANSITION_WALK = "transition"  # step l multiplies by the transition matrix
    THETA_SMOOTHING = "theta"  # mix smoothed features with the originals


@dataclass(frozen=True)
class DiffusionConfig:
    variant: DiffusionVariant
    steps: int | None = None  # defaults to the pipeline's max_steps
    theta: float | None = None

    def __post_init__(self):
        if self.steps is not None and self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.variant is DiffusionVariant.THETA_SMOOTHING:
            if self.theta is None or not 0.0 < self.theta <= 1.0:
                raise ValueError("theta must be in (0, 1] for the theta variant")
        elif self.theta is not None:
            raise ValueError("theta is only valid for the theta variant")


@dataclass(frozen=True)
class PipelineConfig:
    orbits: tuple[int, ...] = ALL_ORBITS
    max_steps: int = 2
    local_rank: int = 16
    global_rank: int = 128
    kind: MotifMatrixKind = MotifMatrixKind.WEIGHTED_GRAPH
    delta: int = 1
    diffusion: DiffusionConfig | None = None
    global_method: FactorizeMethod = FactorizeMethod.CCD
    oversample: int = 10
    power_iters: int = 2
    ccd: CcdOptions = field(default_factory=CcdOptions)
    seed: int = 0

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.local_rank < 1 or self.global_rank < 1:
            raise ValueError("ranks must be >= 1")
        if not self.orbits or any(not 1 <= t <= NUM_ORBITS for t in self.orbits):
            raise ValueError(f"orbits must be a nonempty subset of 1..{NUM_ORBITS}")
        if len(set(self.orbits)) != len(self.orbits):
            raise ValueError("orbits must not repeat")


@dataclass(frozen=True)
class ColumnBlock:
    """Provenance of one column range of the concatenated matrix."""

    tag: str  # "orbit" or "attributes"
    start: int
    stop: int
    orbit: int | None = None
    k: int | None = None
    is_zero: bool = False


@dataclass(frozen=True)
class ConcatenatedEmbeddings:
    matrix: np.ndarray
    blocks: tuple[ColumnBlock, ...]

    def __post_init__(self):
        if self.blocks:
            covered = [(b.start, b.stop) for b in self.blocks]
            pos = 0
            for start, stop in covered:
                if start != pos or stop < start:
                    raise ValueError("blocks must tile the columns exactly")
                pos = stop
            if pos != self.matrix.shape[1]:
                raise ValueError("blocks must tile the columns exactly")


@dataclass(frozen=True)
class GlobalEmbedding:
    nodes: np.ndarray  # N x global rank
    basis: np.ndarray  # global rank x columns(Y)
    residual: float | None
    objective_path: tuple[float, ...] | None = None


def _block_seed(seed: int, k: int, orbit: int) -> int:
    return int(np.random.SeedSequence((seed, k, orbit)).generate_state(1)[0])


def local_embeddings(
    g: Graph, counts: EdgeOrbitCounts, cfg: PipelineConfig
) -> list[tuple[int, int, np.ndarray, bool]]:
    """Column-normalized local factors, one (k, orbit, U, is_zero) per block.

    Blocks are produced k-major: every orbit at k=1, then every orbit at k=2,
    and so on. Each U has exactly ``cfg.local_rank`` columns; orbits whose
    weight matrix is empty at the configured delta give all-zero blocks, and
    rank shortfalls are zero-padded so the layout never varies.
    """
    n = g.num_nodes
    rank_eff = min(cfg.local_rank, n)
    oversample_eff = min(cfg.oversample, n - rank_eff)
    out = []
    weight_cache: dict[int, MotifWeightedGraph] = {}
    for k in range(1, cfg.max_steps + 1):
        for orbit in cfg.orbits:
            wg = weight_cache.get(orbit)
            if wg is None:
                wg = build_motif_weight_matrix(g, counts, orbit, cfg.delta)
                weight_cache[orbit] = wg
            if wg.is_empty:
                log.info("orbit %d has no edges at delta=%d; zero block", orbit, cfg.delta)
                out.append((k, orbit, np.zeros((n, cfg.local_rank)), True))
                continue
            op = KStepOperator(wg, cfg.kind, k)
            fac_cfg = FactorizeConfig(
                rank=rank_eff,
                oversample=oversample_eff,
                power_iters=cfg.power_iters,
                seed=_block_seed(cfg.seed, k, orbit),
            )
            factors = randomized_low_rank(op, fac_cfg)
            u = normalize_columns(factors.U)
            if rank_eff < cfg.local_rank:
                u = np.hstack([u, np.zeros((n, cfg.local_rank - rank_eff))])
            out.append((k, orbit, u, False))
    return out


def concatenate_embeddings(
    blocks: list[tuple[int, int, np.ndarray, bool]],
    attributes: np.ndarray | None = None,
) -> ConcatenatedEmbeddings:
    """Stack local blocks (already in k-major order) and optional attributes."""
    mats = []
    provenance = []
    pos = 0
    n = blocks[0][2].shape[0] if blocks else (attributes.shape[0] if attributes is not None else 0)
    for k, orbit, u, is_zero in blocks:
        if u.shape[0] != n:
            raise ValueError("inconsistent node counts across blocks")
        mats.append(u)
        provenance.append(
            ColumnBlock("orbit", pos, pos + u.shape[1], orbit=orbit, k=k, is_zero=is_zero)
        )
        pos += u.shape[1]
    if attributes is not None:
        if attributes.shape[0] != n:
            raise ValueError("attribute rows must match node count")
        mats.append(attributes)
        provenance.append(ColumnBlock("attributes", pos, pos + attributes.shape[1]))
        pos += attributes.shape[1]
    if not mats:
        raise ValueError("nothing to concatenate")
    return ConcatenatedEmbeddings(np.hstack(mats), tuple(provenance))


def global_embedding(
    conc: ConcatenatedEmbeddings,
    rank: int,
    method: FactorizeMethod = FactorizeMethod.CCD,
    seed: int = 0,
    ccd: CcdOptions | None = None,
) -> GlobalEmbedding:
    """Factorize the concatenated matrix at the global rank.

    The rank is clamped to the column count when the concatenation is
    narrower than requested (tiny graphs).
    """
    y = conc.matrix
    cols = y.shape[1]
    if rank > cols:
        log.warning("global rank %d clamped to %d columns", rank, cols)
        rank = cols
    if method is not FactorizeMethod.CCD and rank > min(y.shape):
        log.warning("global rank %d clamped to %d for the randomized method", rank, min(y.shape))
        rank = min(y.shape)
    cfg = FactorizeConfig(rank=rank, seed=seed, ccd=ccd if ccd is not None else CcdOptions())
    if method is FactorizeMethod.CCD:
        factors = ccd_factorize(y, cfg)
    else:
        cfg = replace(cfg, oversample=max(0, min(cfg.oversample, min(y.shape) - rank)))
        factors = randomized_low_rank(y, cfg)
    return GlobalEmbedding(
        nodes=factors.U,
        basis=factors.V,
        residual=factors.residual,
        objective_path=factors.objective_path,
    )


def _apply_power_kind(weights: sp.csr_matrix, kind: MotifMatrixKind, k: int, x: np.ndarray) -> np.ndarray:
    """kind(W^k) @ x without materializing W^k (degrees rebuilt from W^k)."""
    power_deg = np.ones(weights.shape[0])
    for _ in range(k):
        power_deg = weights @ power_deg
    nz = power_deg > 0
    inv = np.divide(1.0, power_deg, out=np.zeros_like(power_deg), where=nz)

    def power(v):
        y = v
        for _ in range(k):
            y = weights @ y
        return y

    if kind is MotifMatrixKind.WEIGHTED_GRAPH:
        return power(x)
    if kind is MotifMatrixKind.TRANSITION:
        return inv[:, None] * power(x)
    if kind is MotifMatrixKind.LAPLACIAN:
        return power_deg[:, None] * x - power(x)
    if kind is MotifMatrixKind.NORMALIZED_LAPLACIAN:
        half = np.sqrt(inv)
        return nz[:, None] * x - half[:, None] * power(half[:, None] * x)
    if kind is MotifMatrixKind.RANDOM_WALK_LAPLACIAN:
        return nz[:, None] * x - inv[:, None] * power(x)
    raise ValueError(f"unknown kind {kind!r}")


def diffuse_attributes(
    g: Graph,
    counts: EdgeOrbitCounts,
    features: np.ndarray,
    dcfg: DiffusionConfig,
    orbits: tuple[int, ...] = ALL_ORBITS,
    kind: MotifMatrixKind = MotifMatrixKind.WEIGHTED_GRAPH,
    delta: int = 1,
    steps_default: int = 2,
) -> np.ndarray:
    """Propagate node features through each orbit's motif structure.

    LINEAR: step l multiplies by kind(W^l). TRANSITION_WALK: every step
    multiplies by the one-step transition matrix (zero motif-degree rows stay
    zero). THETA_SMOOTHING: every step mixes the normalized-Laplacian
    smoothed features with the originals at weight theta. Per-orbit results
    are concatenated and column-normalized.
    """
    if features.shape[0] != g.num_nodes:
        raise ValueError("feature rows must match node count")
    steps = dcfg.steps if dcfg.steps is not None else steps_default
    parts = []
    for orbit in orbits:
        wg = build_motif_weight_matrix(g, counts, orbit, delta)
        current = features.astype(np.float64, copy=True)
        if dcfg.variant is DiffusionVariant.LINEAR:
            for step in range(1, steps + 1):
                current = _apply_power_kind(wg.matrix, kind, step, current)
        elif dcfg.variant is DiffusionVariant.TRANSITION_WALK:
            for _ in range(steps):
                current = _apply_power_kind(wg.matrix, MotifMatrixKind.TRANSITION, 1, current)
        else:
            for _ in range(steps):
                smoothed = _apply_power_kind(
                    wg.matrix, MotifMatrixKind.NORMALIZED_LAPLACIAN, 1, current
                )
                current = (1.0 - dcfg.theta) * smoothed + dcfg.theta * features
        parts.append(current)
    return normalize_columns(np.hstack(parts))


@dataclass(frozen=True)
class PipelineResult:
    embedding: GlobalEmbedding
    concatenated: ConcatenatedEmbeddings
    counts: EdgeOrbitCounts
    config: PipelineConfig


def embed_graph(
    g: Graph,
    cfg: PipelineConfig,
    counts: EdgeOrbitCounts | None = None,
    workers: int = 1,
) -> PipelineResult:
    """Run the whole pipeline: counts, local blocks, diffusion, global factors."""
    if counts is None:
        counts = count_edge_orbits(g, workers=workers)
    blocks = local_embeddings(g, counts, cfg)
    attributes = None
    if cfg.diffusion is not None:
        base = node_motif_features(g, counts)
        attributes = diffuse_attributes(
            g,
            counts,
            base,
            cfg.diffusion,
            orbits=cfg.orbits,
            kind=cfg.kind,
            delta=cfg.delta,
            steps_default=cfg.max_steps,
        )
    conc = concatenate_embeddings(blocks, attributes)
    emb = global_embedding(
        conc,
        cfg.global_rank,
        method=cfg.global_method,
        seed=_block_seed(cfg.seed, 0, 0),
        ccd=cfg.ccd,
    )
    return PipelineResult(embedding=emb, concatenated=conc, counts=counts, config=cfg)
