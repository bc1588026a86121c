"""
Thin SVDs of tall-skinny block-row matrices.

Two families, each with single and double orthonormalization:

- randomized (alg1, alg2): mix the columns with a structured random orthogonal
  operator, factor with TSQR discarding numerically zero directions, take a
  dense SVD of the small triangular factor and unmix the right vectors;
- Gram (alg3, alg4): eigendecompose A^T A, then recover and explicitly
  normalize the left singular vectors, discarding directions below the square
  root of the working precision.
"""

import logging
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from core.config.settings import RunConfig
from core.errors.exceptions import ArgumentError
from core.matrix.blocks import BlockRowMatrix, SmallDense, column_norms, gram, left_multiply_small, map_blocks
from core.matrix.kernels import dense_svd, dense_sym_eig
from core.mixing.mixing import MixingOperator, apply, apply_inverse, build_mixing
from core.qr.tsqr import tsqr_factor
from core.svd.result import Algorithm, SvdResult

logger = logging.getLogger(__name__)


def _check_tall(a: BlockRowMatrix, tag: Algorithm) -> None:
    if a.n_rows < a.n_cols:
        raise ArgumentError(f"({tag.value}) input must be tall, got {a.n_rows}x{a.n_cols}")


def _empty_result(a: BlockRowMatrix, tag: Algorithm) -> SvdResult:
    """The rank-zero factorization, on a's row partition."""
    u = BlockRowMatrix.from_blocks([np.zeros((block.shape[0], 0)) for block in a.blocks], a.block_rows)
    return SvdResult(u=u, sigma=np.zeros(0), v=np.zeros((a.n_cols, 0)), algorithm_tag=tag)


def _build_omega(n: int, seed: int) -> Optional[MixingOperator]:
    # A single column needs no mixing
    return build_mixing(n, seed) if n >= 2 else None


def _mix_rows(a: BlockRowMatrix, omega: Optional[MixingOperator]) -> BlockRowMatrix:
    """Forms A Omega^T: Omega applied to every row of A, that is every column of A^T."""
    if omega is None:
        return a
    return map_blocks(a, lambda block, _: apply(omega, block.T).T)


def _unmix(omega: Optional[MixingOperator], v: SmallDense) -> SmallDense:
    if omega is None or v.shape[1] == 0:
        return v
    return apply_inverse(omega, v)


def _finish_randomized(q: BlockRowMatrix, t: SmallDense, omega, tag: Algorithm) -> SvdResult:
    u_small, sigma, v_small = dense_svd(t)
    u = left_multiply_small(q, u_small)
    return SvdResult(u=u, sigma=sigma, v=_unmix(omega, v_small), algorithm_tag=tag).check_finite()


def ts_svd_randomized(a: BlockRowMatrix, cfg: RunConfig) -> SvdResult:
    """Randomized SVD with one TSQR pass."""
    tag = Algorithm.ALG1
    _check_tall(a, tag)
    if a.n_cols == 0:
        return _empty_result(a, tag)
    logger.info("(%s) %dx%d in %d blocks", tag.value, a.n_rows, a.n_cols, a.n_blocks)

    omega = _build_omega(a.n_cols, cfg.seed)
    qr = tsqr_factor(_mix_rows(a, omega), cfg)
    if qr.kept_rank == 0:
        return _empty_result(a, tag)
    return _finish_randomized(qr.q, qr.r_factor, omega, tag)


def ts_svd_randomized_double(a: BlockRowMatrix, cfg: RunConfig) -> SvdResult:
    """Randomized SVD with two TSQR passes, T = R R~."""
    tag = Algorithm.ALG2
    _check_tall(a, tag)
    if a.n_cols == 0:
        return _empty_result(a, tag)
    logger.info("(%s) %dx%d in %d blocks", tag.value, a.n_rows, a.n_cols, a.n_blocks)

    omega = _build_omega(a.n_cols, cfg.seed)
    first = tsqr_factor(_mix_rows(a, omega), cfg)
    if first.kept_rank == 0:
        return _empty_result(a, tag)
    second = tsqr_factor(first.q, cfg)
    if second.kept_rank == 0:
        return _empty_result(a, tag)

    t = second.r_factor @ first.r_factor
    return _finish_randomized(second.q, t, omega, tag)


def _normalized_columns(
    a: BlockRowMatrix, basis: SmallDense, cfg: RunConfig
) -> Tuple[BlockRowMatrix, np.ndarray, SmallDense]:
    """
    Forms a @ basis, measures its column norms, drops columns whose norm is below
    the largest norm times sqrt(working precision) and divides the rest by their norms.
    Returns (normalized columns, their norms, the matching columns of basis).
    """
    product = left_multiply_small(a, basis)
    norms = column_norms(product)
    largest = norms.max() if norms.size else 0.0
    if largest == 0.0:
        keep = np.zeros(norms.size, dtype=bool)
    else:
        keep = norms >= largest * np.sqrt(cfg.working_precision)
    if keep.sum() < norms.size:
        logger.info("(gram) discarded %d of %d directions", norms.size - keep.sum(), norms.size)

    kept_norms = norms[keep]
    normalized = map_blocks(product, lambda block, _: block[:, keep] / kept_norms)
    return normalized, kept_norms, basis[:, keep]


def ts_svd_gram(a: BlockRowMatrix, cfg: RunConfig) -> SvdResult:
    """Gram-matrix SVD with explicit normalization of the left vectors."""
    tag = Algorithm.ALG3
    _check_tall(a, tag)
    if a.n_cols == 0:
        return _empty_result(a, tag)
    logger.info("(%s) %dx%d in %d blocks", tag.value, a.n_rows, a.n_cols, a.n_blocks)

    _, v = dense_sym_eig(gram(a))
    u, sigma, v = _normalized_columns(a, v, cfg)
    if sigma.size == 0:
        return _empty_result(a, tag)

    # Column norms need not come out in eigenvalue order
    order = np.argsort(-sigma, kind="stable")
    u = map_blocks(u, lambda block, _: block[:, order])
    return SvdResult(u=u, sigma=sigma[order], v=v[:, order], algorithm_tag=tag).check_finite()


def ts_svd_gram_double(a: BlockRowMatrix, cfg: RunConfig) -> SvdResult:
    """Gram-matrix SVD with a second Gram orthonormalization of the left vectors."""
    tag = Algorithm.ALG4
    _check_tall(a, tag)
    if a.n_cols == 0:
        return _empty_result(a, tag)
    logger.info("(%s) %dx%d in %d blocks", tag.value, a.n_rows, a.n_cols, a.n_blocks)

    # --- 1. First pass: Y = A V~ Sigma~^{-1} ---
    _, v_tilde = dense_sym_eig(gram(a))
    y, sigma_tilde, v_tilde = _normalized_columns(a, v_tilde, cfg)
    if sigma_tilde.size == 0:
        return _empty_result(a, tag)

    # --- 2. Second pass: Q = Y W T^{-1} ---
    _, w = dense_sym_eig(gram(y))
    q, t, w = _normalized_columns(y, w, cfg)
    if t.size == 0:
        return _empty_result(a, tag)

    # --- 3. R = T W^T Sigma~ V~^T = P Sigma V^T, U = Q P ---
    r = (t[:, None] * w.T) @ (sigma_tilde[:, None] * v_tilde.T)
    p, sigma, v = dense_svd(r)
    u = left_multiply_small(q, p)
    return SvdResult(u=u, sigma=sigma, v=v, algorithm_tag=tag).check_finite()


TALL_SKINNY: Dict[Algorithm, Callable[[BlockRowMatrix, RunConfig], SvdResult]] = {
    Algorithm.ALG1: ts_svd_randomized,
    Algorithm.ALG2: ts_svd_randomized_double,
    Algorithm.ALG3: ts_svd_gram,
    Algorithm.ALG4: ts_svd_gram_double,
}
