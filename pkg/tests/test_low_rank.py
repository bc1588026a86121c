import numpy as np
import pytest

from core.config.settings import RunConfig
from core.errors.exceptions import ArgumentError, StructuralError
from core.generator.generators import SpectrumSpec, generate_test_matrix
from core.matrix.blocks import BlockRowMatrix
from core.metrics.metrics import orthonormality_error, spectral_norm_residual
from core.svd.low_rank import (
    SubspaceIterConfig,
    derive_seeds,
    direct_svd,
    low_rank_gram,
    low_rank_randomized,
    subspace_iteration,
)
from core.svd.result import Algorithm
from oracles import random_orthonormal, reconstruct, spectral_norm

PIPELINES = [(Algorithm.ALG7, low_rank_randomized, 1e-10), (Algorithm.ALG8, low_rank_gram, 1e-8)]


@pytest.mark.parametrize("tag, pipeline, bound", PIPELINES)
def test_exact_rank_input(tag, pipeline, bound, rng, run):
    x = rng.standard_normal((60, 5)) @ rng.standard_normal((5, 40))
    result = pipeline(BlockRowMatrix.from_dense(x, 16), 5, 0, run)

    assert result.algorithm_tag is tag
    assert result.rank == 5
    assert spectral_norm(x - reconstruct(result)) <= bound * spectral_norm(x)


@pytest.mark.parametrize("tag, pipeline, bound", PIPELINES)
def test_factors_are_orthonormal(tag, pipeline, bound, rng, run):
    x = rng.standard_normal((80, 60))
    result = pipeline(BlockRowMatrix.from_dense(x, 16), 5, 3, run)

    assert result.rank == 5
    assert orthonormality_error(result.u) <= 1e-12
    assert orthonormality_error(result.v) <= 1e-12
    assert spectral_norm(x - reconstruct(result)) <= 10 * np.linalg.svd(x, compute_uv=False)[5]


def test_subspace_iteration_captures_range(rng, run):
    x = rng.standard_normal((80, 60))
    q = subspace_iteration(BlockRowMatrix.from_dense(x, 16), SubspaceIterConfig(l=5, i=3), run).to_dense()
    sigma = np.linalg.svd(x, compute_uv=False)

    assert q.shape == (80, 5)
    assert spectral_norm(x - q @ (q.T @ x)) <= 10 * sigma[5]


@pytest.mark.parametrize("inner", ["randomized", "gram"])
def test_subspace_iteration_deterministic(inner, rng, run):
    a = BlockRowMatrix.from_dense(rng.standard_normal((50, 30)), 16)
    cfg = SubspaceIterConfig(l=4, i=2, inner_method=inner, seed=9)
    assert np.array_equal(subspace_iteration(a, cfg, run).to_dense(), subspace_iteration(a, cfg, run).to_dense())


def test_direct_svd_matches_projection(rng, run):
    x = rng.standard_normal((60, 40))
    x /= spectral_norm(x)
    a = BlockRowMatrix.from_dense(x, 16)
    q = subspace_iteration(a, SubspaceIterConfig(l=6, i=1), run)
    result = direct_svd(a, q, run)
    qd = q.to_dense()

    assert result.rank == 6
    assert abs(spectral_norm(x - reconstruct(result)) - spectral_norm(x - qd @ (qd.T @ x))) <= 1e-12


def test_direct_svd_on_coordinate_basis(run):
    x = np.zeros((8, 5))
    x[:5, :5] = np.diag([5.0, 4.0, 3.0, 2.0, 1.0])
    q = np.eye(8)[:, :2]
    result = direct_svd(BlockRowMatrix.from_dense(x, 3), BlockRowMatrix.from_dense(q, 3), run)

    assert np.allclose(result.sigma, [5.0, 4.0])
    assert result.algorithm_tag is Algorithm.ALG7


def test_direct_svd_partition_mismatch(run):
    a = BlockRowMatrix.from_dense(np.ones((6, 3)), 2)
    with pytest.raises(StructuralError):
        direct_svd(a, BlockRowMatrix.from_dense(np.eye(5)[:, :1], 2), run)
    with pytest.raises(StructuralError):
        direct_svd(a, BlockRowMatrix.from_dense(np.eye(6)[:, :1], 4), run)


@pytest.mark.parametrize("tag, pipeline, bound", PIPELINES)
def test_near_optimal_on_decaying_spectrum(tag, pipeline, bound, rng, run):
    sigma = 0.7 ** np.arange(80)
    x = random_orthonormal(rng, 120, 80) @ np.diag(sigma) @ random_orthonormal(rng, 80, 80).T
    result = pipeline(BlockRowMatrix.from_dense(x, 32), 10, 2, run)

    assert spectral_norm(x - reconstruct(result)) <= 10 * sigma[10] + 1e-10


def test_more_iterations_help():
    base = RunConfig(block_rows=64)
    a = generate_test_matrix(400, 200, SpectrumSpec(variant="exp_decay", k=200), base)
    errors = {0: 0.0, 2: 0.0}
    for seed in range(5):
        cfg = base.model_copy(update={"seed": seed})
        for i in errors:
            errors[i] += spectral_norm_residual(a, low_rank_randomized(a, 10, i, cfg))
    assert errors[2] <= errors[0]


def test_randomized_beats_gram_on_exponential_decay():
    run = RunConfig(block_rows=64, seed=3)
    a = generate_test_matrix(400, 200, SpectrumSpec(variant="exp_decay", k=20), run)

    randomized = spectral_norm_residual(a, low_rank_randomized(a, 20, 2, run))
    gram = spectral_norm_residual(a, low_rank_gram(a, 20, 2, run))
    assert randomized < gram


@pytest.mark.parametrize("l, i", [(0, 1), (30, 1), (40, 1), (5, -1)])
@pytest.mark.parametrize("pipeline", [low_rank_randomized, low_rank_gram])
def test_bounds_rejected(pipeline, l, i, rng, run):
    a = BlockRowMatrix.from_dense(rng.standard_normal((50, 30)), 16)
    with pytest.raises(ArgumentError):
        pipeline(a, l, i, run)


def test_derive_seeds():
    seeds = derive_seeds(7, 6)
    assert seeds == derive_seeds(7, 6)
    assert len(set(seeds)) == 6
    assert seeds != derive_seeds(8, 6)
    assert all(0 <= seed < 2**64 for seed in seeds)
