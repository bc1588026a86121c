import csv
import io
import struct

from click.testing import CliRunner

import cli
from core.converter.converters import HEADER
from core.errors.exceptions import NumericalError

SMALL = ["--m", "200", "--n", "40", "--block-rows", "64"]


def _invoke(*args):
    return CliRunner().invoke(cli.main, list(args))


def test_csv_run():
    result = _invoke("--algorithm", "alg1", "--algorithm", "alg2", *SMALL, "--format", "csv")

    assert result.exit_code == 0, result.output
    records = list(csv.reader(io.StringIO(result.output)))
    assert len(records) == 3
    assert [record[0] for record in records[1:]] == ["1", "2"]


def test_markdown_is_default():
    result = _invoke("--algorithm", "alg3", *SMALL)
    assert result.exit_code == 0, result.output
    assert result.output.startswith("| Algorithm |")


def test_low_rank_needs_l_and_iters():
    result = _invoke("--algorithm", "alg7", *SMALL)
    assert result.exit_code == 2


def test_low_rank_rank_out_of_range():
    result = _invoke("--algorithm", "alg7", *SMALL, "--l", "40", "--iters", "1")
    assert result.exit_code == 2


def test_invalid_working_precision():
    result = _invoke("--algorithm", "alg1", *SMALL, "--working-precision", "2.0")
    assert result.exit_code == 2


def test_print_spectrum():
    result = _invoke("--spectrum", "staircase", "--m", "64", "--n", "64", "--print-spectrum")

    assert result.exit_code == 0, result.output
    values = [float(line) for line in result.output.splitlines()]
    assert len(values) == 64
    assert values == sorted(values, reverse=True)


def test_print_spectrum_low_rank_uses_l():
    result = _invoke("--algorithm", "alg8", *SMALL, "--l", "5", "--iters", "1", "--print-spectrum")

    assert result.exit_code == 0, result.output
    assert len(result.output.splitlines()) == 5


def test_dump_then_load(tmp_path):
    path = str(tmp_path / "cli.tsvd")
    dumped = _invoke("--algorithm", "alg2", *SMALL, "--format", "csv", "--dump", path)
    loaded = _invoke("--algorithm", "alg2", *SMALL, "--format", "csv", "--load", path)

    assert dumped.exit_code == 0 and loaded.exit_code == 0
    error_columns = lambda output: list(csv.reader(io.StringIO(output)))[1][7:]
    assert error_columns(dumped.output) == error_columns(loaded.output)


def test_truncated_file_exits_with_format_code(tmp_path):
    path = tmp_path / "bad.tsvd"
    path.write_bytes(b"TSVD")
    result = _invoke("--algorithm", "alg2", *SMALL, "--load", str(path))
    assert result.exit_code == 4


def test_non_finite_file_exits_with_format_code(tmp_path):
    path = tmp_path / "nan.tsvd"
    path.write_bytes(HEADER.pack(b"TSVD", 1, 2, 1) + struct.pack("<2d", 1.0, float("nan")))
    result = _invoke("--algorithm", "alg2", *SMALL, "--load", str(path))
    assert result.exit_code == 4


def test_numerical_failure_exit_code(monkeypatch):
    def failing(spec):
        raise NumericalError("(alg1) factor u is not finite")

    monkeypatch.setattr(cli, "run_bench", failing)
    result = _invoke("--algorithm", "alg1", *SMALL)
    assert result.exit_code == 3
