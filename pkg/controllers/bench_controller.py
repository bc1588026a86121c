import csv
import io
import logging
from typing import Any, Dict, List, Literal, Optional

from fastapi import HTTPException, Query, status
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from starlette.concurrency import run_in_threadpool

from core.config.settings import RunConfig
from core.converter.converters import dump_matrix, load_matrix
from core.errors.exceptions import ArgumentError, FormatError, NumericalError, StructuralError, TsvdError
from core.generator.generators import SpectrumSpec, generate_test_matrix, spectrum_values
from core.matrix.blocks import BlockRowMatrix
from core.metrics.metrics import ErrorReport, error_report
from core.metrics.timing import time_run
from core.svd.low_rank import low_rank_gram, low_rank_randomized
from core.svd.result import Algorithm, SvdResult
from core.svd.tall_skinny import TALL_SKINNY

logger = logging.getLogger(__name__)

SPECTRUM_VARIANTS = {"exp": "exp_decay", "staircase": "staircase"}
COLUMNS = [
    "Algorithm", "m", "n", "l", "i", "CPU Time", "Wall-Clock",
    "||A-USV*||_2", "max|U*U-I|", "max|V*V-I|",
]


class BenchRequest(BaseModel):
    """One benchmark invocation: which algorithms, on which test matrix."""

    model_config = ConfigDict(extra="forbid")

    algorithms: List[Algorithm] = Field(default_factory=lambda: [Algorithm.ALG2], min_length=1)
    m: int = Field(10_000, ge=1)
    n: int = Field(2_000, ge=1)
    l: Optional[int] = None
    i: Optional[int] = None
    spectrum: Literal["exp", "staircase"] = "exp"
    run: RunConfig = Field(default_factory=RunConfig.from_env)
    output_format: Literal["csv", "markdown"] = "markdown"

    @model_validator(mode="after")
    def _check_shape(self) -> "BenchRequest":
        low_rank = any(algorithm.is_low_rank for algorithm in self.algorithms)
        if low_rank and (self.l is None or self.i is None):
            raise ValueError("l and i are required for alg7 and alg8")
        if not low_rank and (self.l is not None or self.i is not None):
            raise ValueError("l and i apply only to alg7 and alg8")
        if self.m < self.n:
            raise ValueError(f"m must be at least n, got m={self.m}, n={self.n}")
        return self

    def spectrum_for(self, algorithm: Algorithm) -> SpectrumSpec:
        k = self.l if algorithm.is_low_rank else self.n
        return SpectrumSpec(variant=SPECTRUM_VARIANTS[self.spectrum], k=k)


class BenchSpec(BenchRequest):
    """A benchmark request that may also read or write a matrix file. Command line only."""

    load_path: Optional[str] = None
    dump_path: Optional[str] = None


class BenchRow(BaseModel):
    algorithm: Algorithm
    m: int
    n: int
    l: Optional[int] = None
    i: Optional[int] = None
    report: ErrorReport


def _run_algorithm(algorithm: Algorithm, a: BlockRowMatrix, spec: BenchSpec) -> SvdResult:
    if algorithm is Algorithm.ALG7:
        return low_rank_randomized(a, spec.l, spec.i, spec.run)
    if algorithm is Algorithm.ALG8:
        return low_rank_gram(a, spec.l, spec.i, spec.run)
    return TALL_SKINNY[algorithm](a, spec.run)


def run_bench(spec: BenchSpec) -> List[BenchRow]:
    """
    Runs every requested algorithm and measures it. Matrix generation and the
    accuracy checks are kept outside the timed region.
    """
    matrices: Dict[int, BlockRowMatrix] = {}
    loaded = load_matrix(spec.load_path, spec.run.block_rows) if spec.load_path else None

    def matrix_for(algorithm: Algorithm) -> BlockRowMatrix:
        if loaded is not None:
            return loaded
        try:
            spectrum = spec.spectrum_for(algorithm)
        except ValidationError as e:
            raise ArgumentError(f"(run_bench) invalid spectrum: {e}") from e
        if spectrum.k not in matrices:
            matrices[spectrum.k] = generate_test_matrix(spec.m, spec.n, spectrum, spec.run)
            if spec.dump_path and len(matrices) == 1:
                dump_matrix(matrices[spectrum.k], spec.dump_path)
        return matrices[spectrum.k]

    rows = []
    for algorithm in spec.algorithms:
        a = matrix_for(algorithm)
        timing = time_run(lambda: _run_algorithm(algorithm, a, spec))

        try:
            report = error_report(a, timing.value, spec.run, timing)
        except ValidationError as e:
            raise NumericalError(f"({algorithm.value}) error report is not finite: {e}") from e

        logger.info("(run_bench) %s finished in %.3f s wall", algorithm.value, report.wall_seconds)
        rows.append(BenchRow(
            algorithm=algorithm,
            m=a.n_rows,
            n=a.n_cols,
            l=spec.l if algorithm.is_low_rank else None,
            i=spec.i if algorithm.is_low_rank else None,
            report=report,
        ))
    return rows


def _cells(row: BenchRow) -> List[str]:
    report = row.report
    optional = lambda value: "" if value is None else str(value)
    return [
        row.algorithm.label, str(row.m), str(row.n), optional(row.l), optional(row.i),
        f"{report.cpu_seconds:.2E}", f"{report.wall_seconds:.2E}",
        f"{report.reconstruction:.2E}", f"{report.left_ortho:.2E}", f"{report.right_ortho:.2E}",
    ]


def render_rows(rows: List[BenchRow], output_format: str) -> str:
    """Formats rows as CSV or as a markdown table, numbers in 3-significant-digit E-format."""
    if output_format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(_cells(row) for row in rows)
        return buffer.getvalue()

    lines = [
        "| " + " | ".join(COLUMNS) + " |",
        "|" + "|".join("---" for _ in COLUMNS) + "|",
    ]
    lines.extend("| " + " | ".join(_cells(row)) + " |" for row in rows)
    return "\n".join(lines) + "\n"


def _http_error(e: TsvdError) -> HTTPException:
    if isinstance(e, NumericalError):
        status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    else:
        status_code = status.HTTP_400_BAD_REQUEST
    return HTTPException(status_code=status_code, detail={"success": False, "message": str(e)})


async def run_bench_endpoint(request: BenchRequest) -> Dict[str, Any]:
    spec = BenchSpec(**dict(request))
    try:
        # The numerical work is synchronous; keep it off the event loop
        rows = await run_in_threadpool(run_bench, spec)
        return {
            "success": True,
            "message": f"Ran {len(rows)} algorithm(s) on a {rows[0].m}x{rows[0].n} matrix.",
            "rows": [row.model_dump(mode="json") for row in rows],
            "table": render_rows(rows, spec.output_format),
        }

    except (ArgumentError, StructuralError, FormatError, NumericalError) as e:
        logger.warning("BENCH FAILURE: %s", e)
        raise _http_error(e)

    except Exception as e:
        logger.exception("GENERAL BENCH FAILURE")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail={"success": False, "message": f"Benchmark failed: {type(e).__name__} - {str(e)}"},
        )


async def spectrum_endpoint(
    variant: Literal["exp", "staircase"] = Query("exp", description="Spectrum shape."),
    k: int = Query(..., description="Number of values."),
) -> Dict[str, Any]:
    try:
        spectrum = SpectrumSpec(variant=SPECTRUM_VARIANTS[variant], k=k)
    except ValidationError as e:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail={"success": False, "message": f"Invalid spectrum: {e.errors()[0]['msg']}"},
        )
    values = spectrum_values(spectrum)
    return {"success": True, "variant": spectrum.variant, "k": k, "values": values.tolist()}
