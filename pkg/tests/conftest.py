from functools import lru_cache

import numpy as np
import pytest

from gvarlearn.simulate import draw_series, sparse_var2_example

# variable indices 0-based, lags 1-based
VAR2_TEMPORAL = {(1, 0, 0), (1, 0, 1), (1, 1, 1), (1, 2, 2), (1, 2, 3), (1, 3, 3), (2, 1, 0), (2, 3, 2)}
VAR2_CONTEMPORANEOUS = {(0, 2), (2, 3)}


@pytest.fixture(scope="session")
def var2_model():
    return sparse_var2_example()


@lru_cache(maxsize=None)
def var2_series(n: int, seed: int) -> np.ndarray:
    return draw_series(sparse_var2_example(), n, seed=seed).values


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
