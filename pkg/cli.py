import logging
import sys

import click
from pydantic import ValidationError

from controllers.bench_controller import BenchSpec, render_rows, run_bench
from core.config.settings import RunConfig, configure_logging, set_workers
from core.errors.exceptions import ArgumentError, FormatError, NumericalError, StructuralError
from core.generator.generators import spectrum_values
from core.svd.result import Algorithm

logger = logging.getLogger(__name__)

EXIT_NUMERICAL = 3
EXIT_FORMAT = 4


def _validation_message(error: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in e['loc']) or 'spec'}: {e['msg']}" for e in error.errors())


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--algorithm", "algorithms", multiple=True, default=("alg2",), show_default=True,
              type=click.Choice([algorithm.value for algorithm in Algorithm]),
              help="Algorithm to run; repeat for several rows.")
@click.option("--m", "m", type=int, default=10_000, show_default=True, help="Rows of the test matrix.")
@click.option("--n", "n", type=int, default=2_000, show_default=True, help="Columns of the test matrix.")
@click.option("--l", "l", type=int, default=None, help="Rank for alg7/alg8.")
@click.option("--iters", "i", type=int, default=None, help="Subspace iterations for alg7/alg8.")
@click.option("--spectrum", type=click.Choice(["exp", "staircase"]), default="exp", show_default=True)
@click.option("--working-precision", type=float, default=None, help="Discard tolerance [default: 1e-11].")
@click.option("--seed", type=int, default=None, help="Seed of the random mixing and start blocks.")
@click.option("--block-rows", type=int, default=None, help="Rows per block [default: 1024].")
@click.option("--power-iters", type=int, default=None, help="Power iterations for the error estimate [default: 20].")
@click.option("--workers", type=int, default=None, help="Worker threads [default: available cores].")
@click.option("--format", "output_format", type=click.Choice(["csv", "markdown"]), default="markdown",
              show_default=True)
@click.option("--dump", "dump_path", type=click.Path(dir_okay=False), default=None,
              help="Write the generated matrix to PATH.")
@click.option("--load", "load_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Read the matrix from PATH instead of generating it.")
@click.option("--print-spectrum", is_flag=True, help="Print the spectrum values and exit.")
@click.option("--log-level", default=None, help="Logging level for diagnostics on stderr.")
def main(algorithms, m, n, l, i, spectrum, working_precision, seed, block_rows, power_iters, workers,
         output_format, dump_path, load_path, print_spectrum, log_level):
    """Benchmarks tall-skinny and low-rank SVD algorithms on generated test matrices."""
    configure_logging(log_level)

    # --- 1. Validate the invocation ---
    try:
        if workers is not None:
            set_workers(workers)
        run = RunConfig.from_env(
            working_precision=working_precision, seed=seed, block_rows=block_rows, power_iters=power_iters
        )
        spec = BenchSpec(
            algorithms=list(algorithms), m=m, n=n, l=l, i=i, spectrum=spectrum, run=run,
            output_format=output_format, load_path=load_path, dump_path=dump_path,
        )
    except ValidationError as e:
        raise click.UsageError(_validation_message(e))
    except ValueError as e:
        raise click.UsageError(str(e))

    # --- 2. Spectrum listing only ---
    if print_spectrum:
        low_rank = [algorithm for algorithm in spec.algorithms if algorithm.is_low_rank]
        try:
            values = spectrum_values(spec.spectrum_for(low_rank[0] if low_rank else spec.algorithms[0]))
        except ValidationError as e:
            raise click.UsageError(_validation_message(e))
        click.echo("\n".join(f"{value:.17g}" for value in values))
        return

    # --- 3. Run and report ---
    try:
        rows = run_bench(spec)
    except (ArgumentError, StructuralError) as e:
        raise click.UsageError(str(e))
    except FormatError as e:
        click.echo(f"Format error: {e}", err=True)
        sys.exit(EXIT_FORMAT)
    except NumericalError as e:
        click.echo(f"Numerical failure: {e}", err=True)
        sys.exit(EXIT_NUMERICAL)

    click.echo(render_rows(rows, spec.output_format), nl=False)


if __name__ == "__main__":
    main()
