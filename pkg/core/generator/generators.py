"""
Test matrices A = U Sigma V^T with known spectra.

U and V are orthonormal type-II discrete cosine transforms and Sigma holds one
of two spectra: an exponential decay from 1 down to 1e-20, or a fractal
"Devil's staircase" with many repeated values.
"""

import logging
import re
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from core.config.settings import RunConfig
from core.errors.exceptions import ArgumentError
from core.matrix.blocks import BlockRowMatrix, parallel_map

logger = logging.getLogger(__name__)

SMALLEST_EXP_VALUE = 1e-20
STAIRCASE_DIGITS = 6


class SpectrumSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant: Literal["exp_decay", "staircase"]
    k: int

    @model_validator(mode="after")
    def _check_size(self) -> "SpectrumSpec":
        minimum = 2 if self.variant == "exp_decay" else 1
        if self.k < minimum:
            raise ValueError(f"{self.variant} spectrum needs k >= {minimum}, got {self.k}")
        return self


def _staircase_value(j: int, k: int) -> float:
    # The quotient is evaluated in single precision, then rounded half up
    quotient = np.float32(j) * np.float32(8**STAIRCASE_DIGITS) / np.float32(k)
    rounded = int(np.floor(np.float64(quotient) + 0.5))
    binary = re.sub("[1-7]", "1", format(rounded, "o"))
    return int(binary, 2) / 2**STAIRCASE_DIGITS / (1 - 2.0**-STAIRCASE_DIGITS)


def spectrum_values(spec: SpectrumSpec) -> np.ndarray:
    """The k nonzero-candidate singular values of the spectrum, descending."""
    if spec.variant == "exp_decay":
        if spec.k < 2:
            raise ArgumentError(f"(spectrum_values) exp_decay needs k >= 2, got {spec.k}")
        steps = np.arange(spec.k) / (spec.k - 1)
        return np.exp(steps * np.log(SMALLEST_EXP_VALUE))

    if spec.k < 1:
        raise ArgumentError(f"(spectrum_values) staircase needs k >= 1, got {spec.k}")
    values = np.array([_staircase_value(j, spec.k) for j in range(spec.k)])
    return np.sort(values)[::-1]


def cosine_factor(dim: int, rows: np.ndarray, cols: int) -> np.ndarray:
    """Rows `rows` and the leading `cols` columns of the orthonormal dim x dim DCT-II matrix."""
    rows = np.asarray(rows, dtype=np.int64)
    index = np.arange(cols, dtype=np.int64)
    # Reduce the angle exactly in integers before scaling by pi
    phase = ((2 * rows[:, None] + 1) * index[None, :]) % (4 * dim)
    factor = np.sqrt(2.0 / dim) * np.cos(np.pi * phase / (2 * dim))
    if cols > 0:
        factor[:, 0] = 1.0 / np.sqrt(dim)
    return factor


def generate_test_matrix(m: int, n: int, spec: SpectrumSpec, run: RunConfig) -> BlockRowMatrix:
    """
    Builds A = U Sigma V^T block by block; only the leading k columns of U and
    V contribute, so no m x m factor is ever formed.
    """
    if m < n:
        raise ArgumentError(f"(generate_test_matrix) need m >= n, got {m}x{n}")
    if spec.k > n:
        raise ArgumentError(f"(generate_test_matrix) spectrum size k = {spec.k} exceeds n = {n}")

    sigma = spectrum_values(spec)
    right = sigma[:, None] * cosine_factor(n, np.arange(n), spec.k).T

    starts = range(0, m, run.block_rows)
    blocks = parallel_map(
        lambda start: cosine_factor(m, np.arange(start, min(start + run.block_rows, m)), spec.k) @ right,
        starts,
    )
    logger.info("(generate_test_matrix) %dx%d %s spectrum, k=%d, %d blocks", m, n, spec.variant, spec.k, len(blocks))
    return BlockRowMatrix.from_blocks(blocks, run.block_rows)


def exact_optimal_error(spec: SpectrumSpec, l: int) -> float:
    """Spectral-norm error of the best rank-l approximation: the (l+1)-th largest value."""
    if l < 0:
        raise ArgumentError(f"(exact_optimal_error) rank must be nonnegative, got {l}")
    if l >= spec.k:
        return 0.0
    return float(spectrum_values(spec)[l])
