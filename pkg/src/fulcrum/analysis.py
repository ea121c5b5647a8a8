"""Closed-form delay, overhead, and sparsity models for the codec.

The reception process at a receiver that remaps to the outer field is a
Markov chain over the number d of independent binary combinations
gathered so far: with n+r inner dimensions a fresh uniform binary
combination is innovative with probability 1 - 2^-(n+r-d), and decoding
completes at d = n (the r expansion dimensions never need to be
collected).  Everything here is exact arithmetic on that chain plus the
algebraic bounds derived from it; the Monte-Carlo simulator is the
cross-check, not the source of truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundReport:
    """Expected receptions with the bracketing bounds that hold for it."""

    expectation: float
    lower_bound: float
    upper_bound: float
    variance_bound: float


def expected_receptions_outer(n: int, r: int) -> float:
    """Mean packets received until an outer/combined receiver decodes:
    n + sum_{i=r+1}^{n+r} 1/(2^i - 1)."""
    _check_nr(n, r)
    total = float(n)
    for i in range(r + 1, n + r + 1):
        if i > 1020:  # 2.0**i overflows past 1023; the terms are long gone
            break
        total += 1.0 / (2.0**i - 1.0)
    return total


def lemma2_bounds(n: int, r: int) -> BoundReport:
    """Geometric-series bracket n + 2^-r - 2^-n-r <= E[N] <= n + 2^-r+1 - 2^-n-r+1."""
    _check_nr(n, r)
    lower = n + _pow2(-r) - _pow2(-n - r)
    upper = n + _pow2(-r + 1) - _pow2(-n - r + 1)
    return BoundReport(
        expectation=expected_receptions_outer(n, r),
        lower_bound=lower,
        upper_bound=upper,
        variance_bound=variance_bound(n, r),
    )


def variance_bound(n: int, r: int) -> float:
    """Upper bound (n + 2^(-r+1)) / (2^(r+1) - 1) on the reception-count
    variance; decays exponentially in r."""
    _check_nr(n, r)
    return (n + _pow2(-r + 1)) / (2.0 ** (r + 1) - 1.0)


def decode_cdf(n: int, r: int, m: int) -> float:
    """Probability that an outer/combined receiver has decoded after m
    receptions."""
    return _absorption_probs(n, r, m)[-1]


def decode_pmf(n: int, r: int, m: int) -> float:
    """Probability that decoding happens at exactly the m-th reception."""
    probs = _absorption_probs(n, r, m)
    if m < 1:
        return 0.0
    return probs[-1] - _absorption_probs(n, r, m - 1)[-1]


def decode_at_exact_n(n: int, r: int) -> float:
    """Closed form prod_{i=r+1}^{n+r} (1 - 2^-i) for decoding with zero
    excess receptions; equals decode_cdf(n, r, n)."""
    _check_nr(n, r)
    acc = 1.0
    for i in range(r + 1, n + r + 1):
        acc *= 1.0 - _pow2(-i)
    return acc


def expected_from_pmf(n: int, r: int, tail: float = 1e-12) -> float:
    """Mean of the decode distribution by direct PMF summation (used to
    cross-check against expected_receptions_outer)."""
    _check_nr(n, r)
    probs = [0.0] * (n + 1)
    probs[0] = 1.0
    total = 0.0
    prev_cdf = 0.0
    m = 0
    while 1.0 - prev_cdf >= tail:
        m += 1
        nxt = [0.0] * (n + 1)
        nxt[n] = probs[n]
        for d in range(n):
            if probs[d] == 0.0:
                continue
            p_innov = 1.0 - _pow2(-(n + r - d))
            nxt[d] += probs[d] * (1.0 - p_innov)
            nxt[d + 1] += probs[d] * p_innov
        probs = nxt
        total += m * (probs[n] - prev_cdf)
        prev_cdf = probs[n]
    # remaining tail mass decodes no earlier than m+1
    return total + (m + 1) * (1.0 - prev_cdf)


def overhead_bits(n: int, r: int, h: int, scheme: str) -> float:
    """Coding-vector bits sent per generation.

    rlnc_high_field: h bits per coefficient, n coefficients, n packets
    (the dependent-packet excess vanishes for large h).
    fulcrum: n+r bits per packet, E[N] packets.
    """
    _check_nr(n, r)
    if scheme == "rlnc_high_field":
        return float(h) * n * n
    if scheme == "fulcrum":
        return expected_receptions_outer(n, r) * (n + r)
    raise ValueError(f"unknown scheme {scheme!r}")


def sparse_innovation_bound(n_total: int, i: int, rho: float) -> float:
    """Innovation-probability lower bound 1 - (1-rho)^(n_total - i) for a
    density-rho packet at a receiver holding i of n_total dimensions."""
    if not 0 < rho <= 0.5:
        raise ValueError("rho must be in (0, 1/2]")
    if not 0 <= i < n_total:
        raise ValueError("need 0 <= i < n_total")
    return 1.0 - (1.0 - rho) ** (n_total - i)


def sparse_expected_bound(n: int, r: int, k: int) -> float:
    """Receptions bound n * exp(k(r+1)/(n+r)) for k nonzeros per vector,
    as stated; see sparse_expected_bound_tight for the chain's sharper
    intermediate form."""
    _check_sparse(n, r, k)
    e = math.exp(k * (r + 1) / (n + r))
    return n + n * (e - 1.0)


def sparse_expected_bound_tight(n: int, r: int, k: int) -> float:
    """Intermediate bound n * E/(E-1) with E = exp(k(r+1)/(n+r)); sharper
    than sparse_expected_bound whenever E >= 2 and the form whose
    r -> infinity limit is sparse_limit(k)."""
    _check_sparse(n, r, k)
    e = math.exp(k * (r + 1) / (n + r))
    return n * e / (e - 1.0)


def sparse_limit(k: int) -> float:
    """Per-packet reception factor 1 + 1/(e^k - 1) as r -> infinity."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return 1.0 + 1.0 / (math.exp(k) - 1.0)


def sparse_fixed_density_bound(n: int, r: int, rho: float) -> float:
    """Receptions bound n + (1-rho)^(r+1)/rho^2 - (1-rho)^(n+r+1)/rho^2
    for a fixed per-coefficient density rho; tends to n as r grows."""
    _check_nr(n, r)
    if not 0 < rho <= 0.5:
        raise ValueError("rho must be in (0, 1/2]")
    return n + (1 - rho) ** (r + 1) / rho**2 - (1 - rho) ** (n + r + 1) / rho**2


def lt_soliton_nonzeros(n: int, r: int) -> float:
    """Mean nonzeros k ~ ln(n+r) of an ideal-soliton LT inner code;
    reported for reference only, not a codec mode."""
    _check_nr(n, r)
    return math.log(n + r)


def report_rows(
    n_values: list[int],
    r_values: list[int],
    extra_receptions: int = 3,
) -> list[tuple[int, int, str, float]]:
    """Analysis report as (n, r, quantity, value) rows.

    Emits the decode CDF/PMF at m = n .. n+extra_receptions, the mean
    reception count with its bracketing bounds, the variance bound, and
    the coding-vector overhead for both schemes.
    """
    rows: list[tuple[int, int, str, float]] = []
    for n in n_values:
        for r in r_values:
            rep = lemma2_bounds(n, r)
            rows.append((n, r, "expected_receptions", rep.expectation))
            rows.append((n, r, "expected_lower_bound", rep.lower_bound))
            rows.append((n, r, "expected_upper_bound", rep.upper_bound))
            rows.append((n, r, "variance_bound", rep.variance_bound))
            for m in range(n, n + extra_receptions + 1):
                rows.append((n, r, f"decode_cdf(m={m})", decode_cdf(n, r, m)))
                rows.append((n, r, f"decode_pmf(m={m})", decode_pmf(n, r, m)))
            h = 8
            rows.append((n, r, "overhead_bits_fulcrum", overhead_bits(n, r, h, "fulcrum")))
            rows.append(
                (n, r, "overhead_bits_rlnc_gf256", overhead_bits(n, r, h, "rlnc_high_field"))
            )
            rows.append((n, r, "lt_soliton_nonzeros", lt_soliton_nonzeros(n, r)))
    return rows


def _absorption_probs(n: int, r: int, m: int) -> list[float]:
    """Distribution over d = 0..n after m receptions (d = n absorbing)."""
    _check_nr(n, r)
    if m < 0:
        raise ValueError("m must be >= 0")
    probs = [0.0] * (n + 1)
    probs[0] = 1.0
    for _ in range(m):
        nxt = [0.0] * (n + 1)
        nxt[n] = probs[n]
        for d in range(n):
            if probs[d] == 0.0:
                continue
            p_innov = 1.0 - _pow2(-(n + r - d))
            nxt[d] += probs[d] * (1.0 - p_innov)
            nxt[d + 1] += probs[d] * p_innov
        probs = nxt
    return probs


def _pow2(e: int) -> float:
    if e < -1074:
        return 0.0
    return 2.0**e


def _check_nr(n: int, r: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if r < 0:
        raise ValueError("r must be >= 0")


def _check_sparse(n: int, r: int, k: int) -> None:
    _check_nr(n, r)
    if not 1 <= k <= n + r:
        raise ValueError("k must be in 1..n+r")
