"""Smallest-prime-factor sieve and the multiplicative functions built on it.

One table serves primality, the prime log-weight, the Moebius function,
Euler phi, the divisor count, and squarefree divisor enumeration:
``spf[n]`` holds the least prime dividing n, so factoring any n <= limit
is a chain of O(log n) table lookups.  The table is immutable after
construction and safe to share across worker threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Upper bound on table size unless the caller raises it explicitly.
# uint32 entries: 1 << 27 of them is ~0.5 GiB.
DEFAULT_LIMIT_BUDGET = 1 << 27


class TableRangeError(ValueError):
    """An argument fell outside the sieved range, or the limit is over budget."""


@dataclass(frozen=True)
class PrimeTable:
    """Sieve products on [2, limit]: least prime factors and the prime list."""

    limit: int
    spf: np.ndarray     # spf[n] = least prime factor of n, for 2 <= n <= limit
    primes: np.ndarray  # ascending primes <= limit, int64

    def __post_init__(self):
        self.spf.flags.writeable = False
        self.primes.flags.writeable = False


def build_prime_table(limit: int, budget: int = DEFAULT_LIMIT_BUDGET) -> PrimeTable:
    """Sieve least prime factors for 2..limit.

    Memory is proportional to ``limit``; anything above ``budget`` entries is
    rejected so a typo cannot swallow the machine.
    """
    if limit < 2:
        raise TableRangeError(f"table limit must be at least 2, got {limit}")
    if limit > budget:
        raise TableRangeError(
            f"table limit {limit} exceeds the entry budget {budget}; "
            f"pass budget= explicitly if this is intended")
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p:: p]
            block[block == 0] = p
    ns = np.arange(limit + 1, dtype=np.uint32)
    untouched = spf == 0
    untouched[:2] = False
    spf[untouched] = ns[untouched]  # untouched entries are prime
    primes = np.flatnonzero(spf == ns)
    primes = primes[primes >= 2].astype(np.int64)
    return PrimeTable(limit=limit, spf=spf, primes=primes)


def _check_range(n: int, t: PrimeTable, lo: int = 2) -> None:
    if not lo <= n <= t.limit:
        raise TableRangeError(f"n={n} outside table range [{lo}, {t.limit}]")


def is_prime(n: int, t: PrimeTable) -> bool:
    _check_range(n, t)
    return int(t.spf[n]) == n


def varpi(n: int, t: PrimeTable) -> float:
    """log n if n is prime, else 0 (the weight on primes in all sums here)."""
    _check_range(n, t)
    return math.log(n) if int(t.spf[n]) == n else 0.0


def factorize(n: int, t: PrimeTable) -> list[tuple[int, int]]:
    """Ascending (prime, exponent) pairs of n via spf lookups."""
    _check_range(n, t, lo=1)
    out: list[tuple[int, int]] = []
    m = n
    while m > 1:
        p = int(t.spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        out.append((p, e))
    return out


def mobius(n: int, t: PrimeTable) -> int:
    _check_range(n, t, lo=1)
    if n == 1:
        return 1
    m, count = n, 0
    while m > 1:
        p = int(t.spf[m])
        m //= p
        if m % p == 0:
            return 0
        count += 1
    return -1 if count % 2 else 1


def totient(n: int, t: PrimeTable) -> int:
    _check_range(n, t, lo=1)
    out = n
    for p, _ in factorize(n, t):
        out -= out // p
    return out


def tau(n: int, t: PrimeTable) -> int:
    _check_range(n, t, lo=1)
    out = 1
    for _, e in factorize(n, t):
        out *= e + 1
    return out


def squarefree_divisors(n: int, bound: int, t: PrimeTable) -> list[int]:
    """Ascending squarefree divisors d | n with d <= bound (1 included)."""
    _check_range(n, t, lo=1)
    if bound < 1:
        raise ValueError(f"bound must be >= 1, got {bound}")
    ps = [p for p, _ in factorize(n, t)]
    divs = [1]
    for p in ps:
        divs += [d * p for d in divs if d * p <= bound]
    return sorted(divs)


def primes_between(lo: int, hi: int, t: PrimeTable) -> np.ndarray:
    """Primes p with lo <= p <= hi, as an int64 array view."""
    if hi > t.limit:
        raise TableRangeError(f"upper bound {hi} exceeds table limit {t.limit}")
    i = np.searchsorted(t.primes, lo, side="left")
    j = np.searchsorted(t.primes, hi, side="right")
    return t.primes[i:j]


def phi_int(m: int) -> int:
    """Euler phi by trial division, for moduli that may exceed the table."""
    if m < 1:
        raise ValueError(f"phi undefined for {m}")
    out, rest = m, m
    p = 2
    while p * p <= rest:
        if rest % p == 0:
            out -= out // p
            while rest % p == 0:
                rest //= p
        p += 1
    if rest > 1:
        out -= out // rest
    return out
