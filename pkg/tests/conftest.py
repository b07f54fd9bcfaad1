import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from multtable.arith import build_sieve


@pytest.fixture(scope="session")
def sieve():
    return build_sieve(200_000)


@pytest.fixture(scope="session")
def small_sieve():
    return build_sieve(2_000)
