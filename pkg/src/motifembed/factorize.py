"""Low-rank factorization kernels: randomized subspace iteration and
cyclic coordinate descent, plus the column normalizer shared by the
embedding pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import aslinearoperator

# materializing the reconstruction for the residual is only worth it below this
_RESIDUAL_ENTRY_CAP = 4_194_304


def normalize_columns(m: np.ndarray) -> np.ndarray:
    """Scale every nonzero column to unit Euclidean norm; zero columns stay zero."""
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=0)
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return m * scale


class FactorizeMethod(Enum):
    RANDOMIZED_SVD = "rsvd"
    CCD = "ccd"


@dataclass(frozen=True)
class CcdOptions:
    reg: float = 1e-4
    max_sweeps: int = 50
    tol: float = 1e-5

    def __post_init__(self):
        if self.reg < 0:
            raise ValueError("reg must be >= 0")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")


@dataclass(frozen=True)
class FactorizeConfig:
    rank: int = 16
    oversample: int = 10
    power_iters: int = 2
    method: FactorizeMethod = FactorizeMethod.RANDOMIZED_SVD
    ccd: CcdOptions = field(default_factory=CcdOptions)
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.oversample < 0:
            raise ValueError("oversample must be >= 0")
        if self.power_iters < 0:
            raise ValueError("power_iters must be >= 0")


@dataclass(frozen=True)
class LowRankFactors:
    """Rank-limited approximation ``matrix ~= U @ V``.

    U carries the singular-value scaling (its columns are not unit norm);
    callers that want unit columns apply :func:`normalize_columns`.
    ``residual`` is the relative Frobenius reconstruction error, present only
    when it was cheap to compute. ``objective_path`` holds the per-sweep
    regularized objective for the coordinate-descent method.
    """

    U: np.ndarray
    V: np.ndarray
    achieved_rank: int
    residual: float | None = None
    objective_path: tuple[float, ...] | None = None


def _relative_residual(matrix, u: np.ndarray, v: np.ndarray) -> float:
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=np.float64)
    norm = np.linalg.norm(dense)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(dense - u @ v) / norm)


def randomized_low_rank(operator, cfg: FactorizeConfig) -> LowRankFactors:
    """Randomized subspace iteration at rank ``cfg.rank``.

    ``operator`` may be a dense array, a sparse matrix, or any object with
    ``shape``, ``matmat`` and ``rmatmat`` (a scipy LinearOperator). Draws a
    Gaussian test block of ``rank + oversample`` columns from ``cfg.seed``,
    runs ``power_iters`` QR-stabilized power iterations, projects, and takes
    a small dense SVD. Requires rank + oversample <= min(shape).
    """
    materialized = operator if isinstance(operator, np.ndarray) or sp.issparse(operator) else None
    op = aslinearoperator(operator) if materialized is not None else operator
    n_rows, n_cols = op.shape
    draw = cfg.rank + cfg.oversample
    if draw > min(n_rows, n_cols):
        raise ValueError(
            f"rank + oversample = {draw} exceeds min(shape) = {min(n_rows, n_cols)}"
        )

    rng = np.random.default_rng(cfg.seed)
    test = rng.standard_normal((n_cols, draw))
    sample = op.matmat(test)
    for _ in range(cfg.power_iters):
        q, _ = np.linalg.qr(sample)
        z, _ = np.linalg.qr(op.rmatmat(q))
        sample = op.matmat(z)
    q, _ = np.linalg.qr(sample)

    b = op.rmatmat(q)  # n_cols x draw
    ub, sigma, vt = np.linalg.svd(b.T, full_matrices=False)
    u = q @ (ub[:, : cfg.rank] * sigma[: cfg.rank])
    v = vt[: cfg.rank, :]

    tol = max(n_rows, n_cols) * np.finfo(np.float64).eps * (sigma[0] if sigma.size else 0.0)
    achieved = int(np.sum(sigma[: cfg.rank] > tol))
    u[:, achieved:] = 0.0
    v[achieved:, :] = 0.0

    residual = None
    if materialized is not None and n_rows * n_cols <= _RESIDUAL_ENTRY_CAP:
        residual = _relative_residual(materialized, u, v)
    return LowRankFactors(U=u, V=v, achieved_rank=achieved, residual=residual)


def ccd_factorize(matrix, cfg: FactorizeConfig) -> LowRankFactors:
    """Cyclic coordinate descent on ½‖S − UV‖² + reg·(‖U‖² + ‖V‖²).

    Each coordinate row/column update is the exact single-block minimizer, so
    the recorded objective is non-increasing sweep over sweep. U starts
    uniform in ±0.5/sqrt(rank) from the seed; V starts at zero and is updated
    first. Stops when the relative objective decrease falls below
    ``cfg.ccd.tol`` or after ``cfg.ccd.max_sweeps``.
    """
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=np.float64)
    n_rows, n_cols = dense.shape
    rank = cfg.rank
    reg = cfg.ccd.reg

    rng = np.random.default_rng(cfg.seed)
    half_width = 0.5 / np.sqrt(rank)
    u = rng.uniform(-half_width, half_width, size=(n_rows, rank))
    v = np.zeros((rank, n_cols))

    sq_norm = float(np.einsum("ij,ij->", dense, dense))
    gram_u = u.T @ u
    proj = u.T @ dense
    objectives: list[float] = []
    prev = None
    fit = sq_norm
    for _ in range(cfg.ccd.max_sweeps):
        for d in range(rank):
            denom = gram_u[d, d] + reg
            if denom > 0:
                v[d] = (proj[d] - gram_u[d] @ v + gram_u[d, d] * v[d]) / denom
            else:
                v[d] = 0.0
        gram_v = v @ v.T
        right = dense @ v.T
        for d in range(rank):
            denom = gram_v[d, d] + reg
            if denom > 0:
                u[:, d] = (right[:, d] - u @ gram_v[:, d] + gram_v[d, d] * u[:, d]) / denom
            else:
                u[:, d] = 0.0
        # refresh the U-side caches: reused by the objective and the next sweep
        gram_u = u.T @ u
        proj = u.T @ dense
        fit = sq_norm - 2.0 * np.einsum("ij,ij->", proj, v) + np.einsum("ij,ij->", gram_u @ v, v)
        fit = max(fit, 0.0)
        obj = 0.5 * fit + reg * (float(np.einsum("ij,ij->", u, u)) + float(np.einsum("ij,ij->", v, v)))
        objectives.append(obj)
        if prev is not None and prev - obj <= cfg.ccd.tol * max(prev, 1e-30):
            break
        prev = obj

    achieved = int(
        np.sum((np.linalg.norm(u, axis=0) > 0) & (np.linalg.norm(v, axis=1) > 0))
    )
    residual = float(np.sqrt(fit) / np.sqrt(sq_norm)) if sq_norm > 0 else 0.0
    return LowRankFactors(
        U=u,
        V=v,
        achieved_rank=achieved,
        residual=residual,
        objective_path=tuple(objectives),
    )
