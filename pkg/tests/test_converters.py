import struct

import numpy as np
import pytest

from core.converter.converters import HEADER, dump_matrix, load_matrix
from core.errors.exceptions import FormatError
from core.matrix.blocks import BlockRowMatrix


def test_dump_then_load_is_bit_identical(rng, tmp_path):
    x = rng.standard_normal((37, 5))
    path = tmp_path / "a.tsvd"
    size = dump_matrix(BlockRowMatrix.from_dense(x, 8), str(path))
    loaded = load_matrix(str(path), 10)

    assert size == path.stat().st_size
    assert np.array_equal(loaded.to_dense(), x)
    assert loaded.block_rows == 10
    assert loaded.n_blocks == 4


def test_file_layout(tmp_path):
    path = tmp_path / "small.tsvd"
    dump_matrix(BlockRowMatrix.from_dense([[1.5], [-2.0]], 1), str(path))
    raw = path.read_bytes()

    assert len(raw) == 40
    assert raw[:4] == b"TSVD"
    assert HEADER.unpack(raw[:24])[1:] == (1, 2, 1)
    assert struct.unpack("<2d", raw[24:]) == (1.5, -2.0)


def test_truncated_payload(rng, tmp_path):
    path = tmp_path / "short.tsvd"
    dump_matrix(BlockRowMatrix.from_dense(rng.standard_normal((4, 3)), 2), str(path))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError):
        load_matrix(str(path), 2)


def test_truncated_header(tmp_path):
    path = tmp_path / "header.tsvd"
    path.write_bytes(b"TSVD\x01\x00")
    with pytest.raises(FormatError):
        load_matrix(str(path), 2)


def test_wrong_magic(tmp_path):
    path = tmp_path / "magic.tsvd"
    path.write_bytes(HEADER.pack(b"XSVD", 1, 1, 1) + struct.pack("<d", 1.0))
    with pytest.raises(FormatError):
        load_matrix(str(path), 1)


def test_wrong_version(tmp_path):
    path = tmp_path / "version.tsvd"
    path.write_bytes(HEADER.pack(b"TSVD", 2, 1, 1) + struct.pack("<d", 1.0))
    with pytest.raises(FormatError):
        load_matrix(str(path), 1)


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_non_finite_payload(tmp_path, bad):
    path = tmp_path / "nonfinite.tsvd"
    path.write_bytes(HEADER.pack(b"TSVD", 1, 2, 1) + struct.pack("<2d", 1.0, bad))
    with pytest.raises(FormatError, match="non-finite"):
        load_matrix(str(path), 1)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        load_matrix(str(tmp_path / "absent.tsvd"), 1)
