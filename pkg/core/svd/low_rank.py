"""
Low-rank approximation of arbitrary block-row matrices.

Randomized subspace iteration tracks the dominant column space of A with the
tall-skinny factorizations (single orthonormalization while tracking, double
on the very last step), and the direct SVD finisher turns the resulting basis
Q into U Sigma V^T through the small matrix Q^T A.
"""

import logging
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from core.config.settings import RunConfig
from core.errors.exceptions import ArgumentError, StructuralError
from core.matrix.blocks import BlockRowMatrix, adjoint_times, left_multiply_small
from core.matrix.kernels import dense_svd
from core.mixing.mixing import make_generator
from core.svd.result import Algorithm, SvdResult
from core.svd.tall_skinny import (
    ts_svd_gram,
    ts_svd_gram_double,
    ts_svd_randomized,
    ts_svd_randomized_double,
)

logger = logging.getLogger(__name__)

_INNER = {
    "randomized": (ts_svd_randomized, ts_svd_randomized_double),
    "gram": (ts_svd_gram, ts_svd_gram_double),
}


class SubspaceIterConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    l: int
    i: int = 2
    inner_method: Literal["randomized", "gram"] = "randomized"
    seed: int = 0

    @field_validator("l")
    @classmethod
    def _check_rank(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"l must be positive, got {value}")
        return value

    @field_validator("i")
    @classmethod
    def _check_iterations(cls, value: int) -> int:
        if value < 0:
            raise ValueError(f"i must be nonnegative, got {value}")
        return value


def derive_seeds(seed: int, count: int) -> List[int]:
    """Deterministic 64-bit child seeds of `seed`."""
    state = np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)
    return [int(value) for value in state]


def _gaussian_start(n: int, l: int, seed: int) -> np.ndarray:
    # Column-major fill: column j holds draws j*n .. j*n+n-1 of the stream
    return make_generator(seed).standard_normal((l, n)).T


def subspace_iteration(a: BlockRowMatrix, cfg: SubspaceIterConfig, run: RunConfig) -> BlockRowMatrix:
    """Returns Q with orthonormal columns whose range approximates the range of A."""
    m, n = a.shape
    if not 0 < cfg.l < min(m, n):
        raise ArgumentError(f"(subspace_iteration) need 0 < l < min(m, n) = {min(m, n)}, got l = {cfg.l}")
    if cfg.i < 0:
        raise ArgumentError(f"(subspace_iteration) iteration count must be nonnegative, got {cfg.i}")

    single, double = _INNER[cfg.inner_method]
    seeds = derive_seeds(cfg.seed, 2 * cfg.i + 2)
    logger.info("(subspace_iteration) %dx%d, l=%d, i=%d, inner=%s", m, n, cfg.l, cfg.i, cfg.inner_method)

    start = _gaussian_start(n, cfg.l, seeds[0])
    for j in range(cfg.i):
        # --- Y_j = A Q~_{j-1} = Q_j R_j ---
        y = left_multiply_small(a, start)
        q = single(y, run.model_copy(update={"seed": seeds[2 * j + 1]})).u

        # --- Y~_j = A^T Q_j = Q~_j R~_j, partitioned over the n rows of A^T ---
        y_adjoint = BlockRowMatrix.from_dense(adjoint_times(a, q), run.block_rows)
        start = single(y_adjoint, run.model_copy(update={"seed": seeds[2 * j + 2]})).u.to_dense()
        logger.debug("(subspace_iteration) iteration %d tracks %d directions", j + 1, start.shape[1])

    # --- Last step with double orthonormalization ---
    y = left_multiply_small(a, start)
    return double(y, run.model_copy(update={"seed": seeds[-1]})).u


def direct_svd(a: BlockRowMatrix, q: BlockRowMatrix, run: RunConfig, tag: Algorithm = Algorithm.ALG7) -> SvdResult:
    """SVD of A restricted to the range of Q: B = Q^T A = U~ Sigma V^T, U = Q U~."""
    if q.n_rows != a.n_rows:
        raise StructuralError(f"(direct_svd) Q has {q.n_rows} rows, A has {a.n_rows}")
    b = adjoint_times(q, a)
    u_small, sigma, v = dense_svd(b)
    u = left_multiply_small(q, u_small)
    return SvdResult(u=u, sigma=sigma, v=v, algorithm_tag=tag).check_finite()


def _pipeline(a: BlockRowMatrix, l: int, i: int, run: RunConfig, inner: str, tag: Algorithm) -> SvdResult:
    try:
        cfg = SubspaceIterConfig(l=l, i=i, inner_method=inner, seed=run.seed)
    except ValueError as e:
        raise ArgumentError(f"({tag.value}) invalid subspace iteration settings: {e}") from e
    q = subspace_iteration(a, cfg, run)
    return direct_svd(a, q, run, tag=tag)


def low_rank_randomized(a: BlockRowMatrix, l: int, i: int, run: RunConfig) -> SvdResult:
    """Subspace iteration on the randomized factorizations, then the direct SVD."""
    return _pipeline(a, l, i, run, "randomized", Algorithm.ALG7)


def low_rank_gram(a: BlockRowMatrix, l: int, i: int, run: RunConfig) -> SvdResult:
    """Subspace iteration on the Gram factorizations, then the direct SVD."""
    return _pipeline(a, l, i, run, "gram", Algorithm.ALG8)
