import numpy as np
import pytest

from core.config.settings import RunConfig, get_workers, set_workers


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def run():
    return RunConfig(working_precision=1e-11, seed=7, block_rows=16, power_iters=20)


@pytest.fixture
def workers():
    """Sets the worker count for one test and restores it afterwards."""
    previous = get_workers()
    yield set_workers
    set_workers(previous)
