"""Divisor-sum sieve weights and the progression sums they control.

The weight attached to each n is

    Omega_n = (sum over tuples d_j | n+h_j of lambda_{d_0..d_k})^2,

which for tensor test functions factors through per-coordinate divisor
sums S_j(n) = sum_{d | n+h_j squarefree} mu(d) f(log d / log R).  Each
measured progression sum is reported next to its first-order main term;
the ratio is the whole point of the experiment.

Summation order is pinned everywhere: per-coordinate subset terms follow
one fixed preorder, per-n terms accumulate in ascending n, and totals use
exact (expansion-based) accumulation, so results are bit-identical across
chunkings and thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Iterator, Sequence

import numpy as np

from .accumulate import chunked_sum, exact_partials
from .admissible import ParameterError, SieveParams
from .primes import PrimeTable, phi_int, squarefree_divisors
from .testfn import TestFunction, J_star, J_i, J_cross, lambda_weight


class ProgressionError(ParameterError):
    """The progression [N, 2N] & (b mod W) is unusable as parameterized."""


@dataclass(frozen=True)
class SumReport:
    """A measured sum, its predicted main term, and full provenance."""

    op: str
    measured: float | complex
    predicted: float | complex
    ratio: float | complex | None
    count: int
    params: dict
    bound: float | None = None
    wall_ms: float | None = None

    @staticmethod
    def build(op: str, measured, predicted, count: int, params: dict,
              bound: float | None = None, wall_ms: float | None = None) -> "SumReport":
        ratio = None
        if abs(predicted) > 0:
            ratio = measured / predicted
        return SumReport(op=op, measured=measured, predicted=predicted,
                         ratio=ratio, count=count, params=params,
                         bound=bound, wall_ms=wall_ms)


def progression(p: SieveParams) -> np.ndarray:
    """All n with N <= n <= 2N and n = b (mod W), ascending int64."""
    if p.W > p.N:
        raise ProgressionError(
            f"empty progression: W = {p.W} exceeds N = {p.N}")
    start = p.N + ((p.b - p.N) % p.W)
    return np.arange(start, 2 * p.N + 1, p.W, dtype=np.int64)


def _divisor_plan(F: TestFunction, R: int,
                  primes: Sequence[int]) -> tuple[float, list[tuple[int, float]]]:
    """Fixed-order (product, signed f-value) pairs for squarefree products of
    the given primes below the support cutoff R**(1/(k+1)).

    The order is a preorder walk over ascending primes (include-branch first);
    every Omega evaluation uses this same order, which pins the float result.
    """
    cutoff = float(R) ** F.upper
    logR = math.log(R)
    ps = [int(p) for p in primes if p < cutoff]
    plan: list[tuple[int, float]] = []

    def walk(start: int, prod: int, depth: int) -> None:
        for idx in range(start, len(ps)):
            nxt = prod * ps[idx]
            if nxt >= cutoff:
                break  # primes ascend, so later branches only grow
            sign = -1.0 if (depth + 1) % 2 else 1.0
            plan.append((nxt, sign * F.factor(math.log(nxt) / logR)))
            walk(idx + 1, nxt, depth + 1)

    walk(0, 1, 0)
    return F.f0, plan


def _plan_primes(p: SieveParams, F: TestFunction, t: PrimeTable,
                 coprime_W: bool) -> list[int]:
    cutoff = float(p.R) ** F.upper
    hi = min(t.limit, int(cutoff) + 1)
    ps = [int(q) for q in t.primes[t.primes <= hi] if q < cutoff]
    if coprime_W:
        ps = [q for q in ps if p.W % q != 0]
    return ps


def omega_n(n: int, p: SieveParams, F: TestFunction, t: PrimeTable,
            brute_force: bool = False) -> float:
    """The squared divisor-sum weight at one n.

    The fast path multiplies per-coordinate subset sums; brute_force
    enumerates full divisor tuples through lambda_weight instead and is the
    reference the fast path is checked against.
    """
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if n + max(p.h) > t.limit:
        raise ParameterError(
            f"table limit {t.limit} too small for n + max(h) = {n + max(p.h)}")
    if brute_force:
        return _omega_brute(n, p, F, t)
    f0, plan = _divisor_plan(F, p.R, _plan_primes(p, F, t, coprime_W=False))
    val = 1.0
    for hj in p.h:
        m = n + hj
        s = f0
        for prod, c in plan:
            if m % prod == 0:
                s += c
        val *= s
    return val * val


def _omega_brute(n: int, p: SieveParams, F: TestFunction, t: PrimeTable) -> float:
    cutoff = float(p.R) ** F.upper
    bound = max(1, int(cutoff) + 1)
    lists = []
    for hj in p.h:
        ds = [d for d in squarefree_divisors(n + hj, bound, t) if d < cutoff]
        lists.append(ds)
    s = 0.0
    for tup in iter_product(*lists):
        s += lambda_weight(F, tup, p.R, t)
    return s * s


def _omega_kernel(p: SieveParams, F: TestFunction, t: PrimeTable):
    """Chunk kernel: Omega values for an array of progression points.

    On the progression every divisor of n + h_j is coprime to W, so the plan
    may drop primes dividing W; the dropped terms would contribute exact
    zeros and the per-element float result is unchanged bit for bit.
    """
    f0, plan = _divisor_plan(F, p.R, _plan_primes(p, F, t, coprime_W=True))
    hs = p.h

    def kernel(ns: np.ndarray) -> np.ndarray:
        acc = None
        for hj in hs:
            m = ns + hj
            s = np.full(ns.shape, f0)
            for prod, c in plan:
                s = s + np.where(m % prod == 0, c, 0.0)
            acc = s if acc is None else acc * s
        return acc * acc

    return kernel


def _varpi_kernel(t: PrimeTable):
    spf = t.spf

    def kern(m: np.ndarray) -> np.ndarray:
        pm = spf[m] == m
        return np.where(pm, np.log(m.astype(np.float64)), 0.0)

    return kern


def _main_scale(p: SieveParams, log_power: int) -> float:
    """N * W^k / ((log R)^log_power * phi(W)^(k+1))."""
    phiW = phi_int(p.W)
    return (p.N * float(p.W) ** p.k
            / (math.log(p.R) ** log_power * float(phiW) ** (p.k + 1)))


def omega_sum(p: SieveParams, F: TestFunction, t: PrimeTable,
              threads: int = 1) -> SumReport:
    """Sum of Omega_n over the progression vs J_* N W^k/((log R)^(k+1) phi(W)^(k+1))."""
    _require_table(p, t)
    ns = progression(p)
    kern = _omega_kernel(p, F, t)
    measured = chunked_sum(ns, kern, threads=threads)
    predicted = J_star(F) * _main_scale(p, p.k + 1)
    return SumReport.build("omega_sum", measured, predicted, len(ns), p.echo())


def weighted_prime_sum(p: SieveParams, F: TestFunction, i: int,
                       t: PrimeTable, threads: int = 1) -> SumReport:
    """Sum of varpi(n+h_i) Omega_n vs J_i N W^k/((log R)^k phi(W)^(k+1))."""
    _require_table(p, t)
    ns = progression(p)
    omega = _omega_kernel(p, F, t)
    wp = _varpi_kernel(t)
    hi = p.h[i]

    def kern(chunk: np.ndarray) -> np.ndarray:
        return wp(chunk + hi) * omega(chunk)

    measured = chunked_sum(ns, kern, threads=threads)
    predicted = J_i(F, i) * _main_scale(p, p.k)
    params = p.echo()
    params["i"] = i
    return SumReport.build("weighted_prime_sum", measured, predicted, len(ns), params)


def omega_sum_partials(p: SieveParams, F: TestFunction, t: PrimeTable,
                       lo: int, hi: int):
    """Exact accumulator for the progression restricted to [lo, hi].

    Merging the accumulators of a partition of [N, 2N] reproduces the
    full-range sum exactly (same final double).
    """
    _require_table(p, t)
    ns = progression(p)
    sel = ns[(ns >= lo) & (ns <= hi)]
    return exact_partials(sel, _omega_kernel(p, F, t))


def _require_table(p: SieveParams, t: PrimeTable) -> None:
    if t.limit < 2 * p.N + max(p.h):
        raise ParameterError(
            f"prime table limit {t.limit} below 2N + max(h) = {2 * p.N + max(p.h)}")


# ---------------------------------------------------------------------------
# Finite bilinear oracle for the sieve identity
# ---------------------------------------------------------------------------

def _squarefree_support(R: int, upper: float, W: int, t: PrimeTable) -> np.ndarray:
    """Squarefree d coprime to W with d below the per-coordinate cutoff R**upper."""
    cutoff = float(R) ** upper
    hi = min(t.limit, int(cutoff) + 1)
    ds = []
    for d in range(1, hi + 1):
        if d >= cutoff or math.gcd(d, W) != 1:
            continue
        m, sf = d, True
        while m > 1:
            q = int(t.spf[m])
            m //= q
            if m % q == 0:
                sf = False
                break
        if sf:
            ds.append(d)
    return np.array(ds, dtype=np.int64)


def _coordinate_pairs(ds: np.ndarray, w1: np.ndarray, w2: np.ndarray,
                      phi_by_value: np.ndarray, kind: str,
                      route: str) -> Iterator[tuple[list[int], list[float]]]:
    """Stream (lcm, term) rows over all coordinate pairs (d, e) from ds.

    Both routes produce the same multiset of pairs with per-pair values
    computed by the same float expression; only the enumeration differs.
    "pairs" is a direct double loop over (d, e); "gcd" groups
    (d, e) = (g u, g v) by the common factor g with gcd(u, v) = 1.
    Term = w1[d] * w2[e] / den([d, e]).
    """
    maxval = int(ds[-1])
    if route == "pairs":
        for i, d in enumerate(ds):
            d = int(d)
            g = np.gcd(d, ds)
            lcm = (d * ds) // g
            if kind == "lcm":
                den = lcm.astype(np.float64)
            else:
                den = (int(phi_by_value[d]) * phi_by_value[ds]
                       // phi_by_value[g]).astype(np.float64)
            vals = (w1[i] * w2) / den
            yield lcm.tolist(), vals.tolist()
    elif route == "gcd":
        in_support = np.zeros(maxval + 1, dtype=bool)
        in_support[ds] = True
        w1v = np.zeros(maxval + 1)
        w2v = np.zeros(maxval + 1)
        w1v[ds] = w1
        w2v[ds] = w2
        for g in ds.tolist():
            cand = ds[g * ds <= maxval]
            us = cand[in_support[g * cand]]  # g*u squarefree => gcd(u, g) = 1
            for u in us.tolist():
                vs = us[np.gcd(u, us) == 1]
                if not len(vs):
                    continue
                d = g * u
                ev = g * vs
                lcm = (d * ev) // g
                if kind == "lcm":
                    den = lcm.astype(np.float64)
                else:
                    den = (int(phi_by_value[d]) * phi_by_value[ev]
                           // int(phi_by_value[g])).astype(np.float64)
                vals = (w1v[d] * w2v[ev]) / den
                yield lcm.tolist(), vals.tolist()
    else:
        raise ParameterError(f"unknown route {route!r}")


def bilinear_divisor_sum(k: int, W: int, R: int,
                         F1: TestFunction, F2: TestFunction,
                         kind: str, t: PrimeTable,
                         route: str = "pairs",
                         pair_budget: int = 40_000_000) -> SumReport:
    """The finite two-sided divisor sum behind the sieve identity.

    measured: sum over tuples (d_0..d_k), (e_0..e_k), squarefree, coprime
    to W, with [d_0,e_0], ..., [d_k,e_k] pairwise coprime, of
        lambda(F1) lambda(F2) / den,   den = prod_j [d_j, e_j]       (kind "lcm")
                                       or   prod_j phi([d_j, e_j])   (kind "totient").
    predicted: (W/phi(W))^(k+1) (log R)^-(k+1) (int F1' F2')^(k+1).

    The support of the weights truncates the formally infinite sum at the
    per-coordinate cutoff, so the enumeration is exact.  Totals use
    exactly-rounded summation, hence the two enumeration routes give
    bit-identical results on the same inputs.
    """
    if kind not in ("lcm", "totient"):
        raise ParameterError(f"denominator kind must be 'lcm' or 'totient', got {kind!r}")
    if F1.k != k or F2.k != k:
        raise ParameterError("test function arity must match k")
    ds = _squarefree_support(R, F1.upper, W, t)
    if not len(ds):
        raise ParameterError("empty divisor support; raise R")
    npairs = len(ds) ** 2
    if float(npairs) ** (k + 1) > pair_budget:
        raise ParameterError(
            f"enumeration needs ~{float(npairs) ** (k + 1):.3g} tuples, over "
            f"budget {pair_budget}; shrink R or raise pair_budget")
    logR = math.log(R)
    f1 = np.array([F1.factor(math.log(d) / logR) for d in ds])
    f2 = np.array([F2.factor(math.log(d) / logR) for d in ds])
    mus = np.array([_mobius_sf(int(d), t) for d in ds], dtype=np.float64)
    w1 = mus * f1
    w2 = mus * f2
    phi_by_value = np.zeros(int(ds[-1]) + 1, dtype=np.int64)
    for d in ds.tolist():
        phi_by_value[d] = phi_int(d)

    if k == 0:
        total = _fsum_rows(ds, w1, w2, phi_by_value, kind, route)
        count = npairs
    else:
        rows = _coordinate_pairs(ds, w1, w2, phi_by_value, kind, route)
        pairs = [pair for lcms, vals in rows for pair in zip(lcms, vals)]
        total, count = _tuple_recursion(k, pairs)

    phiW = phi_int(W)
    predicted = ((float(W) / phiW) ** (k + 1) / logR ** (k + 1)
                 * F1.deriv_cross(F2) ** (k + 1))
    params = {"k": k, "W": W, "R": R, "kind": kind, "route": route,
              "support_size": len(ds)}
    return SumReport.build("bilinear_divisor_sum", total, predicted, count, params)


def _fsum_rows(ds, w1, w2, phi_by_value, kind, route) -> float:
    """Exactly-rounded flat sum over every pair term (order-independent)."""
    def gen():
        for lcms, vals in _coordinate_pairs(ds, w1, w2, phi_by_value, kind, route):
            yield from vals
    return math.fsum(gen())


def _mobius_sf(d: int, t: PrimeTable) -> int:
    m, cnt = d, 0
    while m > 1:
        m //= int(t.spf[m])
        cnt += 1
    return -1 if cnt % 2 else 1


def _tuple_recursion(k: int, pairs: list[tuple[int, float]]) -> tuple[float, int]:
    """k >= 1: products over coordinates with pairwise-coprime lcms."""
    terms: list[float] = []

    def rec(coord: int, acc_lcm: int, acc_val: float) -> None:
        if coord == k + 1:
            terms.append(acc_val)
            return
        for lcm, val in pairs:
            if math.gcd(lcm, acc_lcm) == 1:
                rec(coord + 1, acc_lcm * lcm, acc_val * val)

    rec(0, 1, 1.0)
    return math.fsum(terms), len(terms)
