import pytest

from glyphlab import builtin_table
from glyphlab.confusables import HomoglyphTable


@pytest.fixture(scope="session")
def table():
    return builtin_table()


@pytest.fixture(scope="session")
def toy_table():
    # a<->CYRILLIC A, b<->GREEK BETA keeps hand computations short
    return HomoglyphTable.from_classes([(0x61, 0x430), (0x62, 0x3B2)])
