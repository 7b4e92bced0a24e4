import pytest

from recurgaps import build_prime_table
from recurgaps.acceptance import shared_table


@pytest.fixture(scope="session")
def small_table():
    """Covers unit tests up to 2e5 plus the widest shift."""
    return build_prime_table(2 * 10 ** 5 + 700)


@pytest.fixture(scope="session")
def mid_table():
    """Covers N = 1e6 experiments."""
    return build_prime_table(2 * 10 ** 6 + 700)


@pytest.fixture(scope="session")
def big_table():
    """Shared table for the verification suite (N = 4e6)."""
    return shared_table()
