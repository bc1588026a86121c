from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.errors.exceptions import NumericalError
from core.matrix.blocks import BlockRowMatrix, SmallDense


class Algorithm(str, Enum):
    ALG1 = "alg1"  # randomized
    ALG2 = "alg2"  # randomized, double orthonormalization
    ALG3 = "alg3"  # Gram
    ALG4 = "alg4"  # Gram, double orthonormalization
    ALG7 = "alg7"  # subspace iteration + direct SVD, randomized inner factorizations
    ALG8 = "alg8"  # subspace iteration + direct SVD, Gram inner factorizations

    @property
    def is_low_rank(self) -> bool:
        return self in (Algorithm.ALG7, Algorithm.ALG8)

    @property
    def label(self) -> str:
        return self.value.removeprefix("alg")


@dataclass(frozen=True, eq=False)
class SvdResult:
    u: BlockRowMatrix
    sigma: np.ndarray
    v: SmallDense
    algorithm_tag: Algorithm

    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    def check_finite(self) -> "SvdResult":
        """Raises NumericalError if any factor holds NaN or Inf."""
        factors = {"sigma": [self.sigma], "v": [self.v], "u": self.u.blocks}
        for name, arrays in factors.items():
            if not all(np.all(np.isfinite(array)) for array in arrays):
                raise NumericalError(f"({self.algorithm_tag.value}) factor {name} is not finite")
        return self
