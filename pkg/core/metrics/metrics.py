import logging
import math
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, field_validator

from core.config.settings import METRIC_SEED, RunConfig
from core.errors.exceptions import ArgumentError
from core.matrix.blocks import BlockRowMatrix, SmallDense, adjoint_times, gram, left_multiply_small
from core.metrics.timing import TimedRun
from core.mixing.mixing import make_generator
from core.svd.result import SvdResult

logger = logging.getLogger(__name__)


class ErrorReport(BaseModel):
    reconstruction: float
    left_ortho: float
    right_ortho: float
    cpu_seconds: float = 0.0
    wall_seconds: float = 0.0

    @field_validator("*")
    @classmethod
    def _check_nonnegative(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"error report entries must be finite and nonnegative, got {value}")
        return value


def _residual_times(a: BlockRowMatrix, u: BlockRowMatrix, sigma: np.ndarray, v: SmallDense, x: np.ndarray) -> BlockRowMatrix:
    """(A - U Sigma V^T) x for an n x 1 block x, never forming the residual."""
    ax = left_multiply_small(a, x)
    correction = left_multiply_small(u, sigma[:, None] * (v.T @ x))
    return BlockRowMatrix(
        tuple(p - c for p, c in zip(ax.blocks, correction.blocks)),
        ax.row_offsets, ax.n_rows, ax.n_cols, ax.block_rows,
    )


def _residual_adjoint_times(a: BlockRowMatrix, u: BlockRowMatrix, sigma: np.ndarray, v: SmallDense, y: BlockRowMatrix) -> np.ndarray:
    """(A - U Sigma V^T)^T y."""
    return adjoint_times(a, y) - v @ (sigma[:, None] * adjoint_times(u, y))


def spectral_norm_residual(a: BlockRowMatrix, result: SvdResult, iters: int = 20, seed: int = METRIC_SEED) -> float:
    """
    Power-method estimate of ||A - U Sigma V^T||_2.

    Iterates x <- M^T M x / ||M^T M x|| from a seeded Gaussian start and reads
    off sqrt(x^T M^T M x) at the final iterate; the estimate never exceeds the
    true norm beyond roundoff and is nondecreasing in `iters`.
    """
    if iters < 1:
        raise ArgumentError(f"(spectral_norm_residual) need at least one iteration, got {iters}")
    m, n = a.shape
    if result.u.n_rows != m or result.v.shape[0] != n or result.u.n_cols != result.sigma.size \
            or result.v.shape[1] != result.sigma.size:
        raise ArgumentError(
            f"(spectral_norm_residual) factors U {result.u.shape}, sigma {result.sigma.shape}, "
            f"V {result.v.shape} do not fit A {a.shape}"
        )

    u = result.u.repartition_like(a)
    sigma, v = result.sigma, result.v

    x = make_generator(seed).standard_normal((n, 1))
    x /= np.linalg.norm(x)
    for _ in range(iters):
        z = _residual_adjoint_times(a, u, sigma, v, _residual_times(a, u, sigma, v, x))
        norm = np.linalg.norm(z)
        if norm == 0.0:
            return 0.0
        x = z / norm

    # Rayleigh quotient x^T M^T M x = ||M x||^2 for unit x
    mx = _residual_times(a, u, sigma, v, x)
    return float(np.sqrt(sum(np.sum(block * block) for block in mx.blocks)))


def orthonormality_error(x: Union[BlockRowMatrix, SmallDense]) -> float:
    """max |X^T X - I| over all entries."""
    product = gram(x) if isinstance(x, BlockRowMatrix) else np.asarray(x).T @ np.asarray(x)
    if product.size == 0:
        return 0.0
    return float(np.max(np.abs(product - np.eye(product.shape[0]))))


def error_report(a: BlockRowMatrix, result: SvdResult, run: RunConfig, timing: Optional[TimedRun] = None,
                 seed: int = METRIC_SEED) -> ErrorReport:
    """The three accuracy columns plus the timings of the run that produced `result`."""
    report = ErrorReport(
        reconstruction=spectral_norm_residual(a, result, iters=run.power_iters, seed=seed),
        left_ortho=orthonormality_error(result.u),
        right_ortho=orthonormality_error(result.v),
        cpu_seconds=timing.cpu_seconds if timing else 0.0,
        wall_seconds=timing.wall_seconds if timing else 0.0,
    )
    logger.debug("(error_report) %s: %s", result.algorithm_tag.value, report)
    return report
