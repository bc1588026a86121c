import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from core.errors.exceptions import ArgumentError
from core.matrix.blocks import SmallDense, as_small_dense

logger = logging.getLogger(__name__)


def dense_svd(b) -> Tuple[SmallDense, np.ndarray, SmallDense]:
    """
    Thin SVD of a small dense matrix.

    Returns (u, sigma, v) with b = u @ diag(sigma) @ v.T, sigma descending and
    nonnegative, and orthonormal columns in u and v.
    """
    b = as_small_dense(b, "dense_svd")
    rows, cols = b.shape
    rank = min(rows, cols)
    if rank == 0:
        return np.zeros((rows, 0)), np.zeros(0), np.zeros((cols, 0))

    try:
        u, sigma, vt = scipy.linalg.svd(b, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        # gesdd can fail to converge; fall back to the QR-iteration driver
        logger.info("(dense_svd) gesdd did not converge on a %dx%d matrix, retrying with gesvd", rows, cols)
        u, sigma, vt = scipy.linalg.svd(b, full_matrices=False, lapack_driver="gesvd")
    return u, sigma, vt.T


def dense_sym_eig(b) -> Tuple[np.ndarray, SmallDense]:
    """
    Eigendecomposition of a symmetric (positive semidefinite) matrix.

    Eigenvalues come back in descending order with roundoff negatives clamped to zero.
    """
    b = as_small_dense(b, "dense_sym_eig")
    if b.shape[0] != b.shape[1]:
        raise ArgumentError(f"(dense_sym_eig) expected a square matrix, got shape {b.shape}")
    if b.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0))

    eigenvalues, eigenvectors = scipy.linalg.eigh(b)
    order = np.argsort(eigenvalues)[::-1]
    return np.maximum(eigenvalues[order], 0.0), eigenvectors[:, order]
