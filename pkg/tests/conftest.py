import numpy as np
import pytest

# forecast PDs and exposures of the ten-class worked example
TABLE_N = (43, 46, 39, 39, 43, 32, 26, 14, 16, 2)
TABLE_PD = (0.00015, 0.0003, 0.0006, 0.0011, 0.002, 0.0035, 0.006, 0.0105, 0.0185, 0.057)
TABLE_DEFAULTS = (0, 1, 0, 1, 0, 1, 1, 2, 1, 1)


@pytest.fixture
def table_input():
    from pdbacktest.minp import MinPInput

    return MinPInput(TABLE_N, TABLE_PD, TABLE_DEFAULTS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
