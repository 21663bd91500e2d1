import pytest

from ramsphere import limit_constants


@pytest.fixture(scope="session")
def consts():
    return limit_constants()
