"""
Structured random orthogonal mixing.

Omega = D F S D~ F S~ stands in for a dense Gaussian test matrix: S~ and S are
uniformly random permutations, F a unitary discrete Fourier transform and D~, D
diagonal matrices of random unit-modulus phases. Real vectors of even length n
are viewed as n/2 complex numbers (consecutive entries are the real and
imaginary parts), which makes Omega a real orthogonal n x n operator.

For odd n the complex pairing is impossible; there each F is an orthonormal
type-II cosine transform and each D holds random signs, keeping the two-stage
chain and exact orthogonality. `parity_mode` records this fallback.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.fft

from core.errors.exceptions import ArgumentError
from core.matrix.blocks import SmallDense, as_small_dense

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MixingStage:
    phases: np.ndarray
    perm: np.ndarray


@dataclass(frozen=True, eq=False)
class MixingOperator:
    n: int
    stage1: MixingStage
    stage2: MixingStage
    parity_mode: bool


def make_generator(seed: int) -> np.random.Generator:
    """The library's seeded stream: PCG64 on a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed))


def fisher_yates(rng: np.random.Generator, size: int) -> np.ndarray:
    """Durstenfeld's in-place shuffle of 0..size-1."""
    perm = np.arange(size)
    if size < 2:
        return perm
    # One draw per position, for i = size-1 down to 1: j uniform on 0..i
    draws = rng.integers(0, np.arange(size, 1, -1))
    for i, j in zip(range(size - 1, 0, -1), draws):
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def _draw_stage(rng: np.random.Generator, slots: int, parity_mode: bool) -> MixingStage:
    if parity_mode:
        phases = np.where(rng.integers(0, 2, size=slots) == 1, 1.0, -1.0)
    else:
        phases = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=slots))
    perm = fisher_yates(rng, slots)
    phases.setflags(write=False)
    perm.setflags(write=False)
    return MixingStage(phases=phases, perm=perm)


def build_mixing(n: int, seed: int) -> MixingOperator:
    """Draws the two (D, F, S) stages for dimension n from the seeded stream."""
    if n < 2:
        raise ArgumentError(f"(build_mixing) dimension must be at least 2, got {n}")

    rng = make_generator(seed)
    parity_mode = n % 2 == 1
    slots = n if parity_mode else n // 2
    stage1 = _draw_stage(rng, slots, parity_mode)
    stage2 = _draw_stage(rng, slots, parity_mode)
    if parity_mode:
        logger.debug("(build_mixing) odd dimension %d, using the real cosine fallback", n)
    return MixingOperator(n=n, stage1=stage1, stage2=stage2, parity_mode=parity_mode)


def _check_rows(omega: MixingOperator, x, name: str) -> np.ndarray:
    x = as_small_dense(x, name)
    if x.shape[0] != omega.n:
        raise ArgumentError(f"({name}) operator has dimension {omega.n}, input has {x.shape[0]} rows")
    return x


def _unpermute(y: np.ndarray, perm: np.ndarray) -> np.ndarray:
    x = np.empty_like(y)
    x[perm] = y
    return x


def apply(omega: MixingOperator, x) -> SmallDense:
    """Applies Omega to every column of x."""
    x = _check_rows(omega, x, "apply")

    if omega.parity_mode:
        y = x
        for stage in (omega.stage1, omega.stage2):
            y = stage.phases[:, None] * scipy.fft.dct(y[stage.perm], type=2, norm="ortho", axis=0)
        return y

    z = x[0::2] + 1j * x[1::2]
    for stage in (omega.stage1, omega.stage2):
        z = stage.phases[:, None] * np.fft.fft(z[stage.perm], axis=0, norm="ortho")
    out = np.empty_like(x)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def apply_inverse(omega: MixingOperator, x) -> SmallDense:
    """Applies Omega^{-1} = Omega^T to every column of x."""
    x = _check_rows(omega, x, "apply_inverse")

    if omega.parity_mode:
        y = x
        for stage in (omega.stage2, omega.stage1):
            y = _unpermute(scipy.fft.idct(stage.phases[:, None] * y, type=2, norm="ortho", axis=0), stage.perm)
        return y

    z = x[0::2] + 1j * x[1::2]
    for stage in (omega.stage2, omega.stage1):
        z = _unpermute(np.fft.ifft(np.conj(stage.phases)[:, None] * z, axis=0, norm="ortho"), stage.perm)
    out = np.empty_like(x)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def materialize(omega: MixingOperator) -> SmallDense:
    """Omega as an explicit n x n real matrix."""
    return apply(omega, np.eye(omega.n))
