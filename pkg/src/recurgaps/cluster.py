"""Detection and extraction of prime clusters with recurrent shifts.

Two layers, deliberately separated: the weighted detector sum whose
positivity certifies existence of a window with m+1 recurrent primes, and
a direct unweighted scan that lists every such window outright.  The scan
is the ground truth (it never reads the sieve weights); the detector is
reported alongside because its sign is the existence argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .accumulate import chunked_sum
from .admissible import ParameterError, SieveParams
from .dynamics import BoxSet, KroneckerSystem, _correlation_kernel, _system_echo, correlation, measure
from .primes import PrimeTable, is_prime, primes_between
from .sieve import (SumReport, progression, _omega_kernel, _varpi_kernel,
                    _main_scale, _require_table)
from .testfn import TestFunction, J_i, J_star


@dataclass(frozen=True)
class ClusterReport:
    """One base point n whose window holds >= m+1 recurrent primes."""

    n: int
    hit_indices: tuple[int, ...]
    primes: tuple[int, ...]
    width: int
    detector_value: float
    consecutive: bool | None = None

    def as_dict(self) -> dict:
        return {"n": self.n, "hit_indices": list(self.hit_indices),
                "primes": list(self.primes), "width": self.width,
                "detector_value": self.detector_value,
                "consecutive": self.consecutive}


def detector_sum(p: SieveParams, F: TestFunction, sys: KroneckerSystem,
                 A: BoxSet, eps: float, m: int, t: PrimeTable,
                 threads: int = 1) -> SumReport:
    """Weighted detector over the progression:

        sum_n Omega_n ( sum_i varpi(n+h_i) (corr(n+h_i-1) - (mu(A)^2 - eps))
                        - m log(3N) ).

    Positive total => some window in range carries m+1 recurrent primes.
    predicted echoes the standard lower-bound shape
        k (eps/2) J_0 - m log(3N) (2 J_*/log R), times the main scale,
    which needs a large J_0/J_* ratio to go positive.
    """
    if p.W0 % sys.g != 0:
        raise ParameterError(
            f"W0={p.W0} must be divisible by the group order g={sys.g}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    _require_table(p, t)
    ns = progression(p)
    omega = _omega_kernel(p, F, t)
    wp = _varpi_kernel(t)
    corr = _correlation_kernel(sys, A)
    thresh = measure(A) ** 2 - eps
    cap = m * math.log(3 * p.N)
    hs = p.h

    def kern(chunk: np.ndarray) -> np.ndarray:
        inner = np.zeros(len(chunk))
        for hi in hs:
            mvals = chunk + hi
            inner = inner + wp(mvals) * (corr(mvals - 1) - thresh)
        return omega(chunk) * (inner - cap)

    measured = chunked_sum(ns, kern, threads=threads)
    scale = _main_scale(p, p.k)
    predicted = (p.k * (eps / 2.0) * J_i(F, 0)
                 - cap * 2.0 * J_star(F) / math.log(p.R)) * scale
    params = p.echo()
    params.update({"eps": eps, "m": m, "system": _system_echo(sys),
                   "set_measure": measure(A)})
    return SumReport.build("detector_sum", measured, predicted, len(ns), params)


def scan_clusters(p: SieveParams, sys: KroneckerSystem, A: BoxSet,
                  eps: float, m: int, t: PrimeTable) -> list[ClusterReport]:
    """Every n in the progression whose window holds >= m+1 shifts with
    n + h_i prime and correlation(n + h_i - 1) above threshold.

    Independent of the sieve weights by design; this is the certificate,
    the detector is the motivation.
    """
    if p.W0 % sys.g != 0:
        raise ParameterError(
            f"W0={p.W0} must be divisible by the group order g={sys.g}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    _require_table(p, t)
    ns = progression(p)
    wp = _varpi_kernel(t)
    corr = _correlation_kernel(sys, A)
    thresh = measure(A) ** 2 - eps
    cap = m * math.log(3 * p.N)
    spf = t.spf

    hits = []
    recur_ok = []
    varpis = []
    for hi in p.h:
        mvals = ns + hi
        hits.append(spf[mvals] == mvals)
        recur_ok.append(corr(mvals - 1) >= thresh)
        varpis.append(wp(mvals))
    good = np.zeros(len(ns), dtype=np.int64)
    for hmask, rmask in zip(hits, recur_ok):
        good += (hmask & rmask).astype(np.int64)

    out: list[ClusterReport] = []
    for idx in np.flatnonzero(good >= m + 1):
        n = int(ns[idx])
        gh = [i for i in range(p.k + 1) if hits[i][idx] and recur_ok[i][idx]]
        ps = tuple(n + p.h[i] for i in gh)
        det = math.fsum(varpis[i][idx] * (corr(np.array([n + p.h[i] - 1]))[0] - thresh)
                        for i in range(p.k + 1) if hits[i][idx]) - cap
        out.append(ClusterReport(n=n, hit_indices=tuple(gh), primes=ps,
                                 width=ps[-1] - ps[0], detector_value=det))
    return out


def consecutive_filter(reports: list[ClusterReport], p: SieveParams,
                       t: PrimeTable) -> list[ClusterReport]:
    """Attach to each report whether its primes are consecutive (no other
    prime strictly between the first and the last).

    When the progression was built in consecutive mode the flag must be
    true for every report; a violation means the residue construction is
    broken and raises immediately.
    """
    out = []
    for rep in reports:
        between = primes_between(rep.primes[0], rep.primes[-1], t)
        flag = len(between) == len(rep.primes) and all(
            int(q) in rep.primes for q in between)
        if p.forced and not flag:
            raise AssertionError(
                f"consecutive-mode invariant breach at n={rep.n}: "
                f"window primes {list(between)} vs cluster {list(rep.primes)}")
        out.append(replace(rep, consecutive=flag))
    return out
