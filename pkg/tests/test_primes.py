import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from recurgaps.primes import (PrimeTable, TableRangeError, build_prime_table,
                              factorize, is_prime, mobius, phi_int,
                              primes_between, squarefree_divisors, tau,
                              totient, varpi)

ORACLE_LIMIT = 10 ** 4


def _trial_division_primes(limit):
    """Independent oracle: trial division only."""
    out = []
    for n in range(2, limit + 1):
        if all(n % p for p in range(2, math.isqrt(n) + 1)):
            out.append(n)
    return out


def _bool_sieve_count(limit):
    """Second independent sieve implementation (plain boolean)."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p:: p] = False
    return int(flags.sum())


def _oracle_factor(n):
    out = []
    m = n
    for p in range(2, n + 1):
        if p * p > m:
            break
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            out.append((p, e))
    if m > 1:
        out.append((m, 1))
    return out


def _oracle_mobius(n):
    fs = _oracle_factor(n)
    if any(e > 1 for _, e in fs):
        return 0
    return -1 if len(fs) % 2 else 1


def _oracle_totient(n):
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def _oracle_tau(n):
    return sum(1 for d in range(1, n + 1) if n % d == 0)


@pytest.fixture(scope="module")
def table():
    return build_prime_table(ORACLE_LIMIT)


def test_first_primes():
    assert build_prime_table(10).primes.tolist() == [2, 3, 5, 7]


def test_boundary_limit():
    assert build_prime_table(2).primes.tolist() == [2]


def test_prime_count_against_two_independent_implementations():
    limit = 10 ** 6
    t = build_prime_table(limit)
    assert len(t.primes) == 78498
    assert len(t.primes) == _bool_sieve_count(limit)
    td = _trial_division_primes(ORACLE_LIMIT)
    assert t.primes[:len(td)].tolist() == td


def test_limit_validation():
    with pytest.raises(TableRangeError):
        build_prime_table(1)
    with pytest.raises(TableRangeError, match="budget"):
        build_prime_table(10 ** 6, budget=10 ** 5)


def test_spf_invariants(table):
    for n in range(2, 500):
        p = int(table.spf[n])
        assert n % p == 0
        assert all(n % q for q in range(2, p))
    assert all(int(table.spf[int(p)]) == int(p) for p in table.primes[:100])


def test_primes_strictly_increasing_and_mutually_indivisible(table):
    ps = table.primes
    assert np.all(np.diff(ps) > 0)
    head = ps[:60].tolist()
    for i, p in enumerate(head):
        assert all(q % p for q in head[i + 1:])


def test_varpi(table):
    assert varpi(4, table) == 0.0
    assert varpi(5, table) == math.log(5)
    assert varpi(2, table) == math.log(2)
    with pytest.raises(TableRangeError):
        varpi(ORACLE_LIMIT + 1, table)
    with pytest.raises(TableRangeError):
        varpi(1, table)


def test_mobius_examples(table):
    assert mobius(1, table) == 1
    assert mobius(12, table) == 0
    assert mobius(30, table) == -1
    with pytest.raises(TableRangeError):
        mobius(0, table)


def test_totient_tau_squarefree_examples(table):
    assert totient(30, table) == 8
    assert tau(12, table) == 6
    assert squarefree_divisors(12, 100, table) == [1, 2, 3, 6]
    assert squarefree_divisors(12, 2, table) == [1, 2]


def test_multiplicative_functions_match_trial_division(table):
    for n in range(1, ORACLE_LIMIT + 1, 7):  # dense sample
        assert mobius(n, table) == _oracle_mobius(n)
    for n in list(range(1, 2000)) + [9973, 9974, 10000]:
        assert mobius(n, table) == _oracle_mobius(n)
        assert tau(n, table) == len([d for d in range(1, n + 1) if n % d == 0])
    for n in list(range(1, 300)) + [1024, 9973]:
        assert totient(n, table) == _oracle_totient(n)


def test_mobius_divisor_sum_identity(table):
    for n in range(1, 2001):
        s = sum(mobius(d, table) for d in range(1, n + 1) if n % d == 0)
        assert s == (1 if n == 1 else 0)


def test_factorize_roundtrip(table):
    for n in (2, 12, 30, 64, 9973, 9996):
        prod = 1
        for p, e in factorize(n, table):
            assert is_prime(p, table)
            prod *= p ** e
        assert prod == n


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=2, max_value=ORACLE_LIMIT))
def test_spf_is_least_prime_factor(n):
    t = _HYP_TABLE
    p = int(t.spf[n])
    assert n % p == 0
    assert all(n % q for q in range(2, min(p, 200)))


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=ORACLE_LIMIT),
       st.integers(min_value=1, max_value=200))
def test_squarefree_divisors_properties(n, bound):
    t = _HYP_TABLE
    ds = squarefree_divisors(n, bound, t)
    assert ds[0] == 1
    assert ds == sorted(set(ds))
    for d in ds:
        assert d <= bound and n % d == 0
        assert _oracle_mobius(d) != 0


def test_primes_between(table):
    assert primes_between(10, 20, table).tolist() == [11, 13, 17, 19]
    with pytest.raises(TableRangeError):
        primes_between(2, ORACLE_LIMIT + 5, table)


def test_phi_int_matches_table(table):
    for n in (1, 2, 30, 9973, 9996):
        assert phi_int(n) == totient(n, table) if n >= 1 else True
    assert phi_int(2 ** 31 - 1) == 2 ** 31 - 2  # Mersenne prime


_HYP_TABLE = build_prime_table(ORACLE_LIMIT)
