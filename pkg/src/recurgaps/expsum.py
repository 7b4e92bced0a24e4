"""Exponential sums over primes, rational approximation, and arc labels.

All frequencies are handled as alpha = a/q + theta with (a, q) = 1: the
rational part of each phase n * a/q is reduced exactly in integer
arithmetic, and the n * theta part goes through a two-term split of theta
so the fractional part keeps full precision out to n ~ 2^28.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accumulate import chunked_sum
from .admissible import ParameterError, SieveParams
from .primes import PrimeTable, phi_int, primes_between, mobius
from .sieve import SumReport, progression, _omega_kernel, _varpi_kernel, _main_scale, _require_table
from .testfn import TestFunction, J_i

# Default arc-cut exponents: P = N^P_EXP marks major denominators,
# Q = N^Q_EXP the dissection height.
P_EXP = 1.0 / 3.0 - 1.0 / 99.0
Q_EXP = 1.0 - 1.0 / 49.0

_SPLIT = float(1 << 28) + 1.0  # Veltkamp split point: n * theta_hi exact for n < 2^28


@dataclass(frozen=True)
class RationalPoint:
    """Frequency a/q + theta with 1 <= a <= q, gcd(a, q) = 1."""

    a: int
    q: int
    theta: float = 0.0

    def __post_init__(self):
        if self.q < 1 or not 1 <= self.a <= self.q:
            raise ParameterError(f"need 1 <= a <= q, got a={self.a}, q={self.q}")
        if math.gcd(self.a, self.q) != 1:
            raise ParameterError(f"a={self.a} and q={self.q} must be coprime")

    @property
    def alpha(self) -> float:
        return self.a / self.q + self.theta


@dataclass(frozen=True)
class ArcLabel:
    """Classification of a frequency: near a low (major) or high (minor)
    denominator rational at scale N."""

    kind: str  # "major" | "minor"
    a: int
    q: int
    P: float
    Q: float


def torus_norm(x: float) -> float:
    """Distance from x to the nearest integer, in [0, 1/2]."""
    return abs(x - round(x))


def _theta_frac(ns: np.ndarray, theta: float) -> np.ndarray:
    """frac(n * theta) with the integer part removed before precision is lost."""
    if theta == 0.0:
        return np.zeros(len(ns))
    if len(ns) and int(ns.max()) >= (1 << 28):
        ext = np.mod(ns.astype(np.float128) * np.float128(theta), 1.0)
        return ext.astype(np.float64)
    c = theta * _SPLIT
    hi = c - (c - theta)   # leading ~25 bits of theta
    lo = theta - hi
    return np.mod(ns * hi, 1.0) + ns * lo


def _phase(ns: np.ndarray, pt: RationalPoint) -> np.ndarray:
    """e(n * (a/q + theta)) with the rational part reduced exactly."""
    frac = ((ns % pt.q) * pt.a % pt.q) / pt.q
    out = np.exp(2j * np.pi * frac)
    if pt.theta != 0.0:
        out = out * np.exp(2j * np.pi * _theta_frac(ns, pt.theta))
    return out


def geometric_phase_sum(x: int, theta: float) -> complex:
    """sum of e(n theta) over x <= n <= 2x."""
    if theta == 0.0 or torus_norm(theta) == 0.0:
        return complex(x + 1, 0.0)
    ns = np.arange(x, 2 * x + 1, dtype=np.int64)
    return complex(np.sum(np.exp(2j * np.pi * _theta_frac(ns, theta))))


def prime_expsum(x: int, D: int, b: int, pt: RationalPoint, t: PrimeTable) -> complex:
    """sum over primes p in [x, 2x], p = b (mod D), of log(p) e(p (a/q + theta))."""
    if D < 1:
        raise ParameterError(f"modulus D must be positive, got {D}")
    if math.gcd(b, D) != 1:
        raise ParameterError(f"gcd(b, D) must be 1, got b={b}, D={D}")
    if 2 * x > t.limit:
        raise ParameterError(f"table limit {t.limit} below 2x = {2 * x}")
    ps = primes_between(x, 2 * x, t)
    ps = ps[ps % D == b % D]
    if not len(ps):
        return 0j
    return complex(np.sum(np.log(ps.astype(np.float64)) * _phase(ps, pt)))


def zq_inverse(D: int, q: int) -> tuple[bool, int]:
    """Whether gcd(D, q) and q/gcd(D, q) are coprime; the inverse of
    q/(D,q) modulo (D,q) when they are (0 when the modulus is 1)."""
    u = math.gcd(D, q)
    v = q // u
    if math.gcd(u, v) != 1:
        return False, 0
    return True, (pow(v, -1, u) if u > 1 else 0)


def expsum_main_term(x: int, D: int, b: int, pt: RationalPoint, t: PrimeTable) -> complex:
    """First-order prediction for prime_expsum:

        mu(q/(D,q)) e(a b vbar/(D,q)) / phi([D,q]) * sum_{x<=n<=2x} e(n theta),

    zero unless gcd(D, q) and q/(D, q) are coprime, with vbar the inverse of
    q/(D,q) mod (D,q).
    """
    if math.gcd(b, D) != 1:
        raise ParameterError(f"gcd(b, D) must be 1, got b={b}, D={D}")
    in_class, vbar = zq_inverse(D, pt.q)
    if not in_class:
        return 0j
    u = math.gcd(D, pt.q)
    v = pt.q // u
    if v > t.limit:
        raise ParameterError(f"q/(D,q) = {v} beyond table limit")
    mu_v = mobius(v, t) if v > 1 else 1
    if mu_v == 0:
        return 0j
    lcm = D * pt.q // u
    phase = np.exp(2j * np.pi * ((pt.a * b % u) * vbar % u) / u) if u > 1 else 1.0
    return mu_v * phase / phi_int(lcm) * geometric_phase_sum(x, pt.theta)


def expsum_discrepancy(q: int, delta: float, x: int, theta_grid: int,
                       t: PrimeTable) -> float:
    """Grid lower bound for the centered prime-sum discrepancy at level q:

        max over a coprime to q, theta on a grid in [-delta, delta], of
        | sum varpi(n) e(n(a/q + theta)) - mu(q)/phi(q) sum e(n theta) |.

    The true sup over theta is not computable; an evenly spaced grid of
    theta_grid points is scanned and the value reported as a lower bound.
    """
    if theta_grid < 3:
        raise ParameterError(f"theta grid needs at least 3 points, got {theta_grid}")
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    mu_over_phi = mobius(q, t) / phi_int(q)
    thetas = np.linspace(-delta, delta, theta_grid) if delta > 0 else np.array([0.0])
    best = 0.0
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        for theta in thetas:
            pt = RationalPoint(a=a, q=q, theta=float(theta))
            s = prime_expsum(x, 1, 1, pt, t)
            center = mu_over_phi * geometric_phase_sum(x, float(theta))
            best = max(best, abs(s - center))
    return best


def weighted_expsum(p: SieveParams, F: TestFunction, i: int, pt: RationalPoint,
                    t: PrimeTable, threads: int = 1) -> SumReport:
    """Progression sum of varpi(n+h_i) e((n+h_i)(a/q+theta)) Omega_n.

    Predicted main term applies when q divides W:
        e(a(b+h_i)/q) J_i (log R)^-k W^k/phi(W)^(k+1) sum e(n theta);
    otherwise predicted is 0 and the suppression envelope
    N W^k / (w (log R)^k phi(W)^(k+1)) is attached as `bound`.
    """
    _require_table(p, t)
    ns = progression(p)
    omega = _omega_kernel(p, F, t)
    wp = _varpi_kernel(t)
    hi = p.h[i]

    def kern(chunk: np.ndarray) -> np.ndarray:
        m = chunk + hi
        base = wp(m) * omega(chunk)
        if pt.q == 1 and pt.theta == 0.0:
            return base.astype(np.complex128)
        return base * _phase(m, pt)

    measured = chunked_sum(ns, kern, threads=threads, complex_valued=True)
    scale = J_i(F, i) * _main_scale(p, p.k) / p.N  # per-n main scale
    params = p.echo()
    params.update({"i": i, "a": pt.a, "q": pt.q, "theta_offset": pt.theta})
    if p.W % pt.q == 0:
        phase = np.exp(2j * np.pi * ((pt.a * ((p.b + hi) % pt.q)) % pt.q) / pt.q)
        predicted = phase * scale * geometric_phase_sum(p.N, pt.theta)
        return SumReport.build("weighted_expsum", measured, complex(predicted),
                               len(ns), params)
    bound = _main_scale(p, p.k) / p.w
    return SumReport.build("weighted_expsum", measured, 0j, len(ns), params,
                           bound=bound)


def convergents(alpha: float, q_cap: float, max_terms: int = 64):
    """Continued-fraction convergents (p, q) of alpha with q <= q_cap."""
    out = []
    a0 = math.floor(alpha)
    p_prev, q_prev = 1, 0
    p_cur, q_cur = a0, 1
    out.append((p_cur, q_cur))
    x = alpha - a0
    for _ in range(max_terms):
        if x <= 1e-18 or q_cur > q_cap:
            break  # remainder at double-precision floor: the expansion is exact
        x = 1.0 / x
        a = math.floor(x)
        if a <= 0:
            break
        x -= a
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        if q_cur > q_cap:
            break
        out.append((p_cur, q_cur))
    return out


def _canonical_aq(pnum: int, q: int) -> tuple[int, int]:
    """Reduce to 1 <= a <= q with gcd(a, q) = 1, modulo 1 on the circle."""
    g = math.gcd(abs(pnum), q) or 1
    pnum, q = pnum // g, q // g
    a = pnum % q
    if a == 0:
        a = q
    return a, q


def dirichlet_approx(alpha: float, x: float) -> tuple[int, int]:
    """Reduced (a, q) with q <= x and |alpha - a/q| (mod 1) <= 1/(qx).

    Scans continued-fraction convergents in increasing q and returns the
    first that satisfies the inequality; one always exists by the standard
    pigeonhole argument.  The defining inequality is re-checked before
    returning.
    """
    if x < 1:
        raise ParameterError(f"need x >= 1, got {x}")
    for pnum, q in convergents(alpha, x):
        if q > x:
            break
        if torus_norm(alpha - pnum / q) <= 1.0 / (q * x):
            a, qq = _canonical_aq(pnum, q)
            if torus_norm(alpha - a / qq) > 1.0 / (qq * x) + 1e-15:
                raise AssertionError("canonicalization broke the approximation")
            return a, qq
    raise AssertionError(f"no convergent approximation found for alpha={alpha}, x={x}")


def classify_arc(alpha: float, N: int,
                 p_exp: float = P_EXP, q_exp: float = Q_EXP) -> ArcLabel:
    """Major if some q <= P = N^p_exp has |alpha - a/q| (mod 1) <= 1/(q Q)
    with Q = N^q_exp; otherwise minor, labeled by its Dirichlet fraction.

    Q >> 2P makes every major witness a convergent (a best approximation),
    so scanning convergents is exhaustive.
    """
    if N < 100:
        raise ParameterError(f"need N >= 100, got {N}")
    P = float(N) ** p_exp
    Q = float(N) ** q_exp
    for pnum, q in convergents(alpha, P):
        if q > P:
            break
        if torus_norm(alpha - pnum / q) <= 1.0 / (q * Q):
            a, qq = _canonical_aq(pnum, q)
            return ArcLabel(kind="major", a=a, q=qq, P=P, Q=Q)
    a, q = dirichlet_approx(alpha, Q)
    return ArcLabel(kind="minor", a=a, q=q, P=P, Q=Q)


def minor_arc_scan(p: SieveParams, F: TestFunction, i: int,
                   alphas: list[float], t: PrimeTable,
                   threads: int = 1) -> list[dict]:
    """|weighted sum| at minor frequencies, against the theta=0 major
    main-term magnitude for contrast."""
    records = []
    main_mag = abs(J_i(F, i) * _main_scale(p, p.k) / p.N
                   * geometric_phase_sum(p.N, 0.0))
    for alpha in alphas:
        label = classify_arc(alpha, p.N)
        if label.kind != "minor":
            raise ParameterError(f"alpha={alpha} is not minor at N={p.N}")
        theta = alpha - label.a / label.q
        pt = RationalPoint(a=label.a, q=label.q, theta=theta)
        rep = weighted_expsum(p, F, i, pt, t, threads=threads)
        records.append({
            "alpha": alpha,
            "a": label.a,
            "q": label.q,
            "magnitude": abs(rep.measured),
            "main_magnitude": main_mag,
            "ratio": abs(rep.measured) / main_mag if main_mag > 0 else None,
        })
    return records
