import pytest

from utils.atomic_data import load_atomic_tables


@pytest.fixture(scope="session")
def catalog():
    return load_atomic_tables()
