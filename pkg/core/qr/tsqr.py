"""
Tall-skinny QR over a block-row matrix.

Each block is factored with Householder QR, stacked R factors are re-factored
up the fixed reduction tree of `tree_schedule`, and the orthogonal factors of
the tree are pushed back down to the blocks to form Q explicitly. The root R
is reduced to row-echelon form with numerically zero pivots removed, and the
negligible trailing rows are discarded together with the matching columns
of Q.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.config.settings import RunConfig
from core.errors.exceptions import ArgumentError
from core.matrix.blocks import BlockRowMatrix, SmallDense, parallel_map, tree_schedule

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QrResult:
    q: BlockRowMatrix
    r_factor: SmallDense
    kept_rank: int


@dataclass(eq=False)
class _TreeNode:
    # q is None for a node carried up unchanged from the level below
    q: Optional[np.ndarray]
    r: np.ndarray
    split: int = 0


def _householder(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Reduced QR with the diagonal of R made nonnegative."""
    q, r = np.linalg.qr(x, mode="reduced")
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return q * signs, r * signs[:, None]


def _merge(left: _TreeNode, right: _TreeNode) -> _TreeNode:
    q, r = _householder(np.vstack((left.r, right.r)))
    return _TreeNode(q=q, r=r, split=left.r.shape[0])


def _reveal_rank(r: np.ndarray, tolerance: float) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Orthogonally reduce an upper triangular R to row-echelon form.

    Columns are walked left to right. A pivot at or above `tolerance` is kept;
    a smaller one is zeroed and the rows beneath it are re-triangularized over
    the remaining columns, so rows carrying off-diagonal mass move up instead
    of being dropped. Returns `(rotation, echelon, rank)` with
    `r ≈ rotation @ echelon` and every row of `echelon` past `rank` negligible.
    """
    rows, cols = r.shape
    echelon = r.copy()
    rotation = np.eye(rows)
    if tolerance == 0.0:
        return rotation, echelon, 0

    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        if abs(echelon[rank, col]) >= tolerance:
            rank += 1
            continue
        if np.linalg.norm(echelon[rank:, col:]) < tolerance:
            break
        echelon[rank:, col] = 0.0
        if col + 1 == cols:
            break
        q, tail = np.linalg.qr(echelon[rank:, col + 1:], mode="complete")
        pivots = min(tail.shape)
        signs = np.ones(q.shape[1])
        signs[:pivots] = np.where(np.diag(tail) < 0, -1.0, 1.0)
        echelon[rank:, col + 1:] = tail * signs[:, None]
        rotation[:, rank:] = rotation[:, rank:] @ (q * signs)
    return rotation, echelon, rank


def tsqr_factor(a: BlockRowMatrix, cfg: RunConfig) -> QrResult:
    m, n = a.shape
    if m < 1:
        raise ArgumentError("(tsqr_factor) input has no rows")
    if m < n:
        raise ArgumentError(f"(tsqr_factor) input must be tall, got {m}x{n}")

    # --- 1. Factor every block ---
    leaves = parallel_map(lambda block: _TreeNode(*_householder(block)), a.blocks)

    # --- 2. Merge R factors up the tree ---
    levels: List[List[_TreeNode]] = [leaves]
    schedule = tree_schedule(len(leaves))
    for pairs in schedule:
        below = levels[-1]
        levels.append(parallel_map(
            lambda pair: _merge(below[pair[0]], below[pair[1]]) if len(pair) == 2
            else _TreeNode(q=None, r=below[pair[0]].r),
            pairs,
        ))
    r_root = levels[-1][0].r

    # --- 3. Discard numerically zero pivots ---
    leading = abs(r_root[0, 0]) if r_root.size else 0.0
    if leading == 0.0:
        # a zero first column leaves no diagonal scale; fall back to the largest entry
        leading = float(np.abs(r_root).max()) if r_root.size else 0.0
    rotation, echelon, kept_rank = _reveal_rank(r_root, leading * cfg.working_precision)
    if kept_rank < n:
        logger.info("(tsqr_factor) discarded %d of %d directions", n - kept_rank, n)

    # --- 4. Push the orthogonal factors back down ---
    coefficients = [rotation[:, :kept_rank]]
    for pairs, nodes in zip(reversed(schedule), reversed(levels[1:])):
        below = []
        for pair, node, coefficient in zip(pairs, nodes, coefficients):
            if node.q is None:
                below.append(coefficient)
            else:
                below.append(node.q[:node.split] @ coefficient)
                below.append(node.q[node.split:] @ coefficient)
        coefficients = below

    q_blocks = parallel_map(lambda job: job[0].q @ job[1], zip(leaves, coefficients))
    q = BlockRowMatrix.from_blocks(q_blocks, a.block_rows)
    logger.debug("(tsqr_factor) %dx%d over %d blocks, kept rank %d", m, n, a.n_blocks, kept_rank)
    return QrResult(q=q, r_factor=echelon[:kept_rank], kept_rank=kept_rank)
