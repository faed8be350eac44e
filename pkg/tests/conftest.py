import pytest

from netdist import TaxaSet, parse_enewick
from netdist.agreement import clear_caches


@pytest.fixture(autouse=True)
def _fresh_caches():
    yield
    clear_caches()


@pytest.fixture
def tree123():
    return parse_enewick("((1,2),3);")


@pytest.fixture
def tree132():
    return parse_enewick("((1,3),2);")


@pytest.fixture
def taxa3():
    return TaxaSet.numbered(3)


@pytest.fixture
def taxa4():
    return TaxaSet.numbered(4)
