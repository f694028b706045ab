import pytest

from wavemix.model import STRONG_FIELD, WEAK_FIELD
from wavemix.propagation import propagate


@pytest.fixture(scope="session")
def weak_trace():
    return propagate(WEAK_FIELD)


@pytest.fixture(scope="session")
def strong_trace():
    return propagate(STRONG_FIELD)
