import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from auctionclear import io  # noqa: E402


@pytest.fixture
def ex41():
    return io.load_fixture("example_4_1")


@pytest.fixture
def ex42():
    return io.load_fixture("example_4_2")


@pytest.fixture
def ex43():
    return io.load_fixture("example_4_3")


def F(x):
    return Fraction(x)
