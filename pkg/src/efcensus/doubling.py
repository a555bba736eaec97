"""Membership machinery for the doubling set.

A positive integer N is a *doubling index* when no signed sum
sum_{n<N} w_n / n with w_n in {-1, 0, +1} equals 1/N; appending such an N to
the denominator range exactly doubles the number of distinct subset sums.
This module decides and certifies membership three independent ways:

* exhaustive *bad prime* enumeration: for m, the primes dividing some reduced
  numerator of 1/m - sum_{j<m} w_j/j.  A prime p outside that set is
  "compatible" with m, and then m a doubling index implies every m*p^k is one
  too.  That closure, grown from 1, certifies membership.
* explicit non-membership certificates: a signed unit-fraction identity
  summing to 1/N over denominators below N, verified exactly in Q.
* extraction from an exact count table: N doubles iff count(N) = 2*count(N-1).

Certified membership chains and verified certificates together partition
[1, 100] exactly; beyond that the closure stays sound but not complete.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .arith import (
    default_prime_table,
    factor_union,
    lcm_range,
    scaled_harmonic,
    signed_unit_sum,
    smallest_factor_sieve,
)
from .errors import CapacityError
from .reporting import BoundReport

MAX_EXACT_M = 14  # 3^(m-1) signed enumeration budget


@dataclass(frozen=True)
class CompatibilityRecord:
    """Exact compatibility data for one m.

    When `member` is false (m is not a doubling index) no prime is compatible
    with m, regardless of `bad`; `compatible` encodes that.
    """

    m: int
    member: bool
    bad: frozenset[int]
    numerator_bound: int  # every enumerated numerator is <= this in |.|

    def compatible(self, p: int) -> bool:
        return self.member and p not in self.bad


def _signed_value_set(coeffs: Sequence[int]) -> tuple[int, int]:
    """Achievable sums of (+c, -c or nothing) over coeffs, as a bitset.

    Returns (bits, offset): sum s is achievable iff bit s + offset is set.
    Partial sums after j steps lie within +-(sum of first j coeffs), so the
    offset keeps every intermediate index in [0, 2*offset] and the right
    shift never discards a set bit.
    """
    offset = sum(coeffs)
    bits = 1 << offset  # the all-zero signing
    for c in coeffs:
        bits |= (bits << c) | (bits >> c)
    return bits, offset


def _bitset_indices(bits: int) -> np.ndarray:
    raw = bits.to_bytes((bits.bit_length() + 7) // 8, "little")
    flat = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return np.nonzero(flat)[0].astype(np.int64)


@lru_cache(maxsize=None)
def bad_primes(m: int) -> CompatibilityRecord:
    """All primes dividing some reduced numerator of 1/m - sum_{j<m} w_j/j.

    Exhausts the 3^(m-1) signings exactly (as a value-set dynamic program
    over the common denominator lcm(1..m), which reaches the same set of
    numerators).  If 0 is reachable, m itself is not a doubling index and no
    prime is compatible.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > MAX_EXACT_M:
        raise CapacityError(
            f"bad_primes({m}) needs a 3^{m - 1} enumeration; "
            f"the exact budget stops at m = {MAX_EXACT_M}"
        )
    d = lcm_range(m)
    bound = scaled_harmonic(m)
    base = d // m
    coeffs = [d // j for j in range(1, m)]
    bits, offset = _signed_value_set(coeffs)
    zero_index = offset - base  # index of value 0, when reachable at all
    if zero_index >= 0 and (bits >> zero_index) & 1:
        return CompatibilityRecord(m, False, frozenset(), bound)
    values = _bitset_indices(bits) - offset + base
    numerators = np.unique(np.abs(values))
    numerators //= np.gcd(numerators, d)  # reduce against the common denominator
    numerators = np.unique(numerators)
    numerators = numerators[numerators > 1]
    if numerators.size:
        spf = smallest_factor_sieve(int(numerators.max()))
        bad = frozenset(int(p) for p in factor_union(numerators, spf))
    else:
        bad = frozenset()
    assert all(p <= bound for p in bad)
    return CompatibilityRecord(m, True, bad, bound)


def compatible(m: int, p: int) -> bool:
    """Is the prime p compatible with m?

    Exact for m <= 14.  Beyond that the numerator bound decides: any prime
    above scaled_harmonic(m) is compatible provided m itself is a certified
    doubling index; smaller primes are conservatively rejected.
    """
    if m <= MAX_EXACT_M:
        return bad_primes(m).compatible(p)
    if p <= scaled_harmonic(m):
        return False
    return m in certified_doubling(m)


@dataclass(frozen=True)
class ChainStep:
    m: int
    p: int
    k: int

    @property
    def value(self) -> int:
        return self.m * self.p ** self.k


@dataclass(frozen=True)
class MembershipChain:
    """Certified route 1 -> ... -> value, one compatible prime power per step."""

    value: int
    steps: tuple[ChainStep, ...]

    def verify(self) -> bool:
        at = 1
        for s in self.steps:
            if s.m != at or s.k < 1 or not compatible(s.m, s.p):
                return False
            at = s.value
        return at == self.value


def certified_doubling(x: int) -> dict[int, MembershipChain]:
    """Certified doubling indices <= x, each with its membership chain.

    Breadth-first closure by value: start at 1, and from each member m add
    every m * p^k <= x with p compatible with m.  Sound for every x;
    complete at least up to 100.
    """
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    table = default_prime_table()
    chains: dict[int, MembershipChain] = {1: MembershipChain(1, ())}
    heap = [1]
    while heap:
        m = heapq.heappop(heap)
        chain = chains[m]
        limit = x // m
        if limit < 2:
            continue
        if m <= MAX_EXACT_M:
            rec = bad_primes(m)
            candidates = (int(p) for p in table.primes_up_to(limit)
                          if rec.compatible(int(p)))
        else:
            bound = scaled_harmonic(m)
            candidates = (int(p) for p in table.primes_up_to(limit)
                          if p > bound)
        for p in candidates:
            pk = p
            k = 1
            while pk <= limit:
                value = m * pk
                if value not in chains:
                    chains[value] = MembershipChain(
                        value, chain.steps + (ChainStep(m, p, k),))
                    heapq.heappush(heap, value)
                pk *= p
                k += 1
    return chains


@dataclass(frozen=True)
class NonMembershipCertificate:
    """A signed unit-fraction identity sum(sign/den) = 1/n over dens < n."""

    n: int
    terms: tuple[tuple[int, int], ...]

    def scaled(self, factor: int) -> "NonMembershipCertificate":
        """The same identity divided by `factor`: certifies n*factor."""
        if factor < 1:
            raise ValueError("scale factor must be positive")
        return NonMembershipCertificate(
            self.n * factor, tuple((s, d * factor) for s, d in self.terms))


def verify_nonmembership(cert: NonMembershipCertificate) -> bool:
    """True iff the certificate identity holds exactly (so n never doubles).

    Malformed certificates (duplicate or out-of-range denominators, bad
    signs) raise; a well-formed identity that sums to anything other than
    1/n merely returns False.
    """
    if cert.n < 2:
        raise ValueError(f"certificate n must be >= 2, got {cert.n}")
    for _, d in cert.terms:
        if not 1 <= d < cert.n:
            raise ValueError(
                f"certificate for {cert.n} uses denominator {d} outside [1, {cert.n})")
    total = signed_unit_sum(cert.terms)  # also rejects duplicates/signs
    return total == Fraction(1, cert.n)


def format_certificate(cert: NonMembershipCertificate) -> str:
    body = " ".join(f"{'+' if s > 0 else '-'}/{d}" for s, d in cert.terms)
    return f"{cert.n} : {body}"


def parse_certificate(line: str) -> NonMembershipCertificate:
    try:
        head, _, body = line.partition(":")
        n = int(head.strip())
        terms = []
        for tok in body.split():
            sign, _, den = tok.partition("/")
            if sign not in ("+", "-"):
                raise ValueError(tok)
            terms.append((1 if sign == "+" else -1, int(den)))
    except ValueError as exc:
        raise ValueError(f"malformed certificate line {line!r}") from exc
    return NonMembershipCertificate(n, tuple(terms))


def bundled_certificates() -> dict[int, NonMembershipCertificate]:
    """Non-membership certificates shipped with the package (all N <= 100
    outside the certified closure)."""
    from importlib.resources import files

    text = files("efcensus.data").joinpath("certificates.txt").read_text()
    certs = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cert = parse_certificate(line)
        if cert.n in certs:
            raise ValueError(f"duplicate certificate for {cert.n}")
        certs[cert.n] = cert
    return certs


def doubling_from_counts(
    counts: Mapping[int, int] | Sequence[int]) -> list[int]:
    """Doubling indices read off an exact count table.

    `counts` maps N -> |distinct sums| and must be contiguous from 0 or 1
    (count(0) = 1 is supplied when absent).  N qualifies iff count doubles
    at N.
    """
    if isinstance(counts, Mapping):
        table = dict(counts)
    else:
        table = dict(enumerate(counts))
    if not table:
        raise ValueError("empty count table")
    lo, hi = min(table), max(table)
    if lo not in (0, 1):
        raise ValueError(f"count table must start at 0 or 1, got {lo}")
    if set(table) != set(range(lo, hi + 1)):
        missing = sorted(set(range(lo, hi + 1)) - set(table))
        raise ValueError(f"count table has gaps at {missing[:5]}")
    if lo == 1:
        table[0] = 1
    if table[0] != 1:
        raise ValueError(f"count(0) must be 1, got {table[0]}")
    return [n for n in range(1, hi + 1) if table[n] == 2 * table[n - 1]]


def check_density_floor(members: Sequence[int], x_max: int) -> BoundReport:
    """Check |U(x)| >= 2x/ln x on 13 <= x <= x_max (and the stronger
    (137/60)x/ln x floor from 1000 on), for an exact member list."""
    ms = sorted(members)
    report = BoundReport("doubling density floor", f"x in [13, {x_max}]")
    for x in range(13, x_max + 1):
        count = bisect_right(ms, x)
        report.add("density2", str(x), count, 2 * x / math.log(x))
        if x >= 1000:
            report.add("density137", str(x), count, (137 / 60) * x / math.log(x))
    return report
