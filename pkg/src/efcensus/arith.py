"""Exact integer and rational arithmetic shared by the census engine.

Everything in the exact paths stays exact: distinct-sum counts overflow 64
bits long before the interesting range ends, certificate identities must hold
as equalities in Q, and the compatibility enumerations need true reduced
numerators.  Python integers and fractions.Fraction already provide canonical
unbounded arithmetic, so this module only adds the quantities the rest of the
package keeps asking for: lcm(1..m), the integer lcm(1..m)*H_m that bounds
compatibility numerators, exact signed unit-fraction sums, and a prime sieve
with an exact counting function.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import CapacityError, format_bytes

# Canonical rational type: always reduced, denominator >= 1, zero is 0/1.
Rational = Fraction

DEFAULT_SIEVE_LIMIT = 10_000_000


def lcm_range(m: int) -> int:
    """lcm(1, ..., m); lcm_range(1) = 1."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    out = 1
    for j in range(2, m + 1):
        out = math.lcm(out, j)
    return out


def log_lcm_range(m: int) -> float:
    """ln lcm(1..m), i.e. the Chebyshev psi function at m."""
    return math.log(lcm_range(m))


def scaled_harmonic(m: int) -> int:
    """lcm(1..m) * (1 + 1/2 + ... + 1/m), always an integer.

    Every numerator reachable by a compatibility enumeration for m is bounded
    by this value in absolute value, which is what makes exhaustive bad-prime
    collection finite.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    d = lcm_range(m)
    return sum(d // j for j in range(1, m + 1))


def signed_unit_sum(terms: Iterable[Tuple[int, int]]) -> Fraction:
    """Exact value of sum(sign / denominator) over (sign, denominator) pairs.

    Signs are +1 or -1 and denominators must be distinct positive integers;
    the empty sum is 0.
    """
    seen = set()
    total = Fraction(0)
    for sign, den in terms:
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign!r}")
        if den < 1:
            raise ValueError(f"denominator must be positive, got {den}")
        if den in seen:
            raise ValueError(f"duplicate denominator {den}")
        seen.add(den)
        total += Fraction(sign, den)
    return total


class PrimeTable:
    """All primes up to a fixed limit, with exact counting.

    A plain byte sieve; the primes are kept in an ascending numpy array so
    counting is a binary search.  Queries beyond the limit raise rather than
    guess.
    """

    def __init__(self, limit: int = DEFAULT_SIEVE_LIMIT):
        if limit < 1:
            raise ValueError(f"limit must be >= 1, got {limit}")
        self.limit = int(limit)
        composite = np.zeros(self.limit + 1, dtype=bool)
        composite[: min(2, self.limit + 1)] = True
        for p in range(2, math.isqrt(self.limit) + 1):
            if not composite[p]:
                composite[p * p :: p] = True
        self.primes = np.nonzero(~composite)[0].astype(np.int64)

    def pi(self, x: int) -> int:
        """Exact number of primes <= x."""
        if x < 0:
            raise ValueError(f"x must be >= 0, got {x}")
        if x > self.limit:
            raise CapacityError(
                f"pi({x}) is beyond the sieve limit {self.limit}; "
                f"build a PrimeTable with a larger limit"
            )
        return int(np.searchsorted(self.primes, x, side="right"))

    def is_prime(self, n: int) -> bool:
        if n > self.limit:
            raise CapacityError(
                f"is_prime({n}) is beyond the sieve limit {self.limit}"
            )
        if n < 2:
            return False
        i = int(np.searchsorted(self.primes, n))
        return i < len(self.primes) and int(self.primes[i]) == n

    def primes_up_to(self, x: int) -> np.ndarray:
        if x > self.limit:
            raise CapacityError(
                f"primes_up_to({x}) is beyond the sieve limit {self.limit}"
            )
        return self.primes[: int(np.searchsorted(self.primes, x, side="right"))]

    def __repr__(self) -> str:
        return f"PrimeTable(limit={self.limit}, primes={len(self.primes)})"


_default_table: PrimeTable | None = None


def default_prime_table() -> PrimeTable:
    """Shared sieve at the default limit, built on first use."""
    global _default_table
    if _default_table is None:
        _default_table = PrimeTable(DEFAULT_SIEVE_LIMIT)
    return _default_table


def prime_pi(x: int, table: PrimeTable | None = None) -> int:
    """Exact prime-counting function via the (default) sieve."""
    return (table or default_prime_table()).pi(x)


def smallest_factor_sieve(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 2 <= n <= limit; spf[0:2] = 1.

    Lets batches of numbers be fully factored by repeated division, which the
    compatibility enumeration uses on millions of numerator values at once.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    spf = np.zeros(limit + 1, dtype=np.int64)
    spf[: min(2, limit + 1)] = 1
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest
    return spf


def factor_union(values: Sequence[int] | np.ndarray, spf: np.ndarray) -> set[int]:
    """Union of the prime factors of all given values (values >= 1)."""
    v = np.asarray(values, dtype=np.int64).copy()
    if v.size and (v.min() < 1 or v.max() >= len(spf)):
        raise ValueError("values out of range for the factor sieve")
    primes: set[int] = set()
    v = v[v > 1]
    while v.size:
        p = spf[v]
        primes.update(np.unique(p).tolist())
        v //= p
        v = v[v > 1]
    return primes
