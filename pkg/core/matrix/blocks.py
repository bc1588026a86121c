"""
Block-row partitioned matrices.

A tall matrix is held as an ordered sequence of horizontal slabs ("blocks"),
the unit of simulated distribution: per-block work runs on a thread pool and
partial results are merged up a fixed binary reduction tree, so every result
is reproducible for a given partition count regardless of scheduling.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple, TypeVar

import numpy as np

from core.config.settings import get_workers
from core.errors.exceptions import ArgumentError, StructuralError

logger = logging.getLogger(__name__)

# Dense matrices small enough for one block owner (n x n with n tall-skinny width)
SmallDense = np.ndarray

T = TypeVar("T")
R = TypeVar("R")


def as_small_dense(x, name: str = "matrix") -> SmallDense:
    """Validates and converts `x` into a finite 2-D float64 array."""
    dense = np.asarray(x, dtype=np.float64)
    if dense.ndim != 2:
        raise ArgumentError(f"({name}) expected a 2-D matrix, got shape {dense.shape}")
    if not np.all(np.isfinite(dense)):
        raise ArgumentError(f"({name}) entries must all be finite")
    return dense


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Applies `func` to every item on the worker pool, preserving order."""
    items = list(items)
    workers = min(get_workers(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def _freeze(block: np.ndarray) -> np.ndarray:
    block.setflags(write=False)
    return block


@dataclass(frozen=True, eq=False)
class BlockRowMatrix:
    blocks: Tuple[np.ndarray, ...]
    row_offsets: Tuple[int, ...]
    n_rows: int
    n_cols: int
    block_rows: int

    def __post_init__(self):
        if self.n_rows < 1:
            raise ArgumentError("(BlockRowMatrix) a matrix needs at least one row")
        if len(self.blocks) != len(self.row_offsets) or not self.blocks:
            raise StructuralError("(BlockRowMatrix) one offset is required per block")
        offset = 0
        for block, start in zip(self.blocks, self.row_offsets):
            if block.ndim != 2 or block.shape[1] != self.n_cols:
                raise StructuralError(
                    f"(BlockRowMatrix) block of shape {block.shape} does not have {self.n_cols} columns"
                )
            if start != offset or block.shape[0] < 1:
                raise StructuralError("(BlockRowMatrix) row offsets must be strictly increasing and contiguous")
            offset += block.shape[0]
        if offset != self.n_rows:
            raise StructuralError(f"(BlockRowMatrix) blocks hold {offset} rows, expected {self.n_rows}")

    @classmethod
    def from_blocks(cls, blocks: Sequence[np.ndarray], block_rows: int) -> "BlockRowMatrix":
        blocks = tuple(_freeze(np.asarray(block, dtype=np.float64)) for block in blocks)
        if not blocks:
            raise ArgumentError("(BlockRowMatrix) at least one block is required")
        widths = {block.shape[1] for block in blocks if block.ndim == 2}
        if len(widths) != 1:
            raise StructuralError(f"(BlockRowMatrix) blocks have inconsistent widths {sorted(widths)}")
        offsets = tuple(int(start) for start in np.cumsum([0] + [b.shape[0] for b in blocks[:-1]]))
        n_rows = sum(block.shape[0] for block in blocks)
        return cls(blocks, offsets, n_rows, widths.pop(), block_rows)

    @classmethod
    def from_dense(cls, x, block_rows: int) -> "BlockRowMatrix":
        """Splits a dense matrix into blocks of `block_rows` rows (the last may be shorter)."""
        dense = as_small_dense(x, "BlockRowMatrix")
        if block_rows < 1:
            raise ArgumentError(f"(BlockRowMatrix) block_rows must be positive, got {block_rows}")
        if dense.shape[0] < 1:
            raise ArgumentError("(BlockRowMatrix) a matrix needs at least one row")
        blocks = [
            np.array(dense[start:start + block_rows])
            for start in range(0, dense.shape[0], block_rows)
        ]
        return cls.from_blocks(blocks, block_rows)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def to_dense(self) -> np.ndarray:
        return np.concatenate(self.blocks, axis=0)

    def repartition(self, block_rows: int) -> "BlockRowMatrix":
        return BlockRowMatrix.from_dense(self.to_dense(), block_rows)

    def repartition_like(self, other: "BlockRowMatrix") -> "BlockRowMatrix":
        """Re-blocks this matrix onto the row partition of `other`."""
        if self.n_rows != other.n_rows:
            raise ArgumentError(
                f"(BlockRowMatrix) cannot align {self.n_rows} rows to a partition of {other.n_rows} rows"
            )
        if self.row_offsets == other.row_offsets:
            return self
        dense = self.to_dense()
        blocks = [np.array(dense[start:start + block.shape[0]]) for block, start in zip(other.blocks, other.row_offsets)]
        return BlockRowMatrix.from_blocks(blocks, other.block_rows)


def map_blocks(a: BlockRowMatrix, f: Callable[[np.ndarray, int], np.ndarray]) -> BlockRowMatrix:
    """
    Applies `f(block, row_offset)` to every block, possibly concurrently.
    The row partition is preserved; all outputs must share one width.
    """
    outputs = parallel_map(lambda job: np.asarray(f(*job), dtype=np.float64), zip(a.blocks, a.row_offsets))

    widths = {out.shape[1] if out.ndim == 2 else None for out in outputs}
    if len(widths) != 1 or None in widths:
        raise StructuralError(f"(map_blocks) block function produced inconsistent widths {widths}")
    for block, out in zip(a.blocks, outputs):
        if out.shape[0] != block.shape[0]:
            raise StructuralError(
                f"(map_blocks) block function changed a block height from {block.shape[0]} to {out.shape[0]}"
            )
    return BlockRowMatrix(
        tuple(_freeze(out) for out in outputs), a.row_offsets, a.n_rows, widths.pop(), a.block_rows
    )


def tree_schedule(count: int) -> List[List[Tuple[int, ...]]]:
    """
    Pairings at each level of the reduction tree over `count` leaves.

    Adjacent items are merged pairwise; an odd item out is carried to the next
    level unchanged. The shape depends only on `count`.
    """
    levels = []
    width = count
    while width > 1:
        levels.append([(k, k + 1) if k + 1 < width else (k,) for k in range(0, width, 2)])
        width = (width + 1) // 2
    return levels


def tree_reduce(parts: Sequence[SmallDense], combine: Callable[[SmallDense, SmallDense], SmallDense]) -> SmallDense:
    """Merges `parts` up the fixed binary tree of `tree_schedule`."""
    if len(parts) == 0:
        raise ArgumentError("(tree_reduce) at least one part is required")

    level = list(parts)
    for depth, pairs in enumerate(tree_schedule(len(level))):
        level = parallel_map(
            lambda pair: combine(level[pair[0]], level[pair[1]]) if len(pair) == 2 else level[pair[0]],
            pairs,
        )
        logger.debug("tree_reduce level %d: %d nodes", depth, len(level))
    return level[0]


def left_multiply_small(a: BlockRowMatrix, g) -> BlockRowMatrix:
    """Forms the tall product a @ g block by block."""
    g = as_small_dense(g, "left_multiply_small")
    if g.shape[0] != a.n_cols:
        raise ArgumentError(f"(left_multiply_small) cannot multiply {a.shape} by {g.shape}")
    return map_blocks(a, lambda block, _: block @ g)


def gram(a: BlockRowMatrix) -> SmallDense:
    """Forms a^T a, summed over blocks and symmetrized."""
    parts = parallel_map(lambda block: block.T @ block, a.blocks)
    b = tree_reduce(parts, np.add)
    return (b + b.T) / 2


def adjoint_times(a: BlockRowMatrix, q: BlockRowMatrix) -> SmallDense:
    """Forms a^T q for co-partitioned a and q."""
    if a.n_rows != q.n_rows or a.row_offsets != q.row_offsets:
        raise StructuralError("(adjoint_times) operands must share one row partition")
    parts = parallel_map(lambda pair: pair[0].T @ pair[1], zip(a.blocks, q.blocks))
    return tree_reduce(parts, np.add)


def column_norms(a: BlockRowMatrix) -> np.ndarray:
    """Euclidean norms of the columns of `a`."""
    parts = parallel_map(lambda block: np.einsum("ij,ij->j", block, block), a.blocks)
    return np.sqrt(tree_reduce(parts, np.add))
