"""
Binary matrix files.

Layout (all little-endian): magic b"TSVD", version u32, m u64, n u64 (a 24-byte
header), then m*n IEEE doubles in row-major order.
"""

import logging
import os
import struct

import numpy as np

from core.errors.exceptions import FormatError
from core.matrix.blocks import BlockRowMatrix

logger = logging.getLogger(__name__)

MAGIC = b"TSVD"
VERSION = 1
HEADER = struct.Struct("<4sIQQ")
PAYLOAD_DTYPE = np.dtype("<f8")


def dump_matrix(a: BlockRowMatrix, path: str) -> int:
    """Writes `a` to `path` block by block; returns the number of bytes written."""
    with open(path, "wb") as file:
        file.write(HEADER.pack(MAGIC, VERSION, a.n_rows, a.n_cols))
        for block in a.blocks:
            file.write(np.ascontiguousarray(block, dtype=PAYLOAD_DTYPE).tobytes())
    size = HEADER.size + a.n_rows * a.n_cols * PAYLOAD_DTYPE.itemsize
    logger.info("(dump_matrix) wrote %dx%d matrix to %s (%d bytes)", a.n_rows, a.n_cols, path, size)
    return size


def load_matrix(path: str, block_rows: int) -> BlockRowMatrix:
    """Reads a matrix file and partitions it into blocks of `block_rows` rows."""
    try:
        with open(path, "rb") as file:
            header = file.read(HEADER.size)
            if len(header) < HEADER.size:
                raise FormatError(f"(load_matrix) '{path}' is too short for a header")
            magic, version, m, n = HEADER.unpack(header)
            if magic != MAGIC:
                raise FormatError(f"(load_matrix) '{path}' has magic {magic!r}, expected {MAGIC!r}")
            if version != VERSION:
                raise FormatError(f"(load_matrix) '{path}' has version {version}, expected {VERSION}")

            expected = m * n * PAYLOAD_DTYPE.itemsize
            actual = os.fstat(file.fileno()).st_size - HEADER.size
            if actual != expected:
                raise FormatError(f"(load_matrix) '{path}' holds {actual} payload bytes, expected {expected}")
            payload = np.fromfile(file, dtype=PAYLOAD_DTYPE, count=m * n)
    except OSError as e:
        raise FormatError(f"(load_matrix) cannot read '{path}': {e}") from e

    if m == 0:
        raise FormatError(f"(load_matrix) '{path}' holds a matrix without rows")
    if not np.all(np.isfinite(payload)):
        raise FormatError(f"(load_matrix) '{path}' holds non-finite entries")
    return BlockRowMatrix.from_dense(payload.astype(np.float64).reshape(m, n), block_rows)
