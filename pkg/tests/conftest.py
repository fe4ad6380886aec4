import numpy as np
import pytest

from crutchlab.tensegrity import (
    apply_prestress,
    build_two_cell_column,
    calibrated_column,
)


@pytest.fixture(scope="session")
def column():
    return build_two_cell_column()


@pytest.fixture(scope="session")
def prestressed(column):
    return apply_prestress(column, 2e-3)


@pytest.fixture(scope="session")
def calibrated():
    return calibrated_column()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
