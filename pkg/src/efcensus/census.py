"""Exact counting of distinct unit-fraction subset sums.

For a finite set S of positive integers, E(S) is the set of values of
sum_{n in S} t_n / n over t in {0,1}^S.  This module computes |E(S)| (and the
whole prefix profile |E({1..N})| for N up to a target) exactly, using four
mutually checking techniques:

* peeling: an element n = m * p^k whose prime power dwarfs every other
  multiple of p^k present exactly doubles the count, so it can be removed and
  accounted as a factor of two (RemovalWitness records why);
* bitmap accumulation: over the common denominator l = lcm(S), the values
  l * E(S) are subset sums of integers, built by shift-OR into a SumsBitmap;
* residue splitting: multiples of a prime q are handled as a small explicit
  sum set whose shifts group by residue class mod q, so the big bitmap only
  needs the q-free elements and its grid shrinks by a factor of q;
* symmetry: E(S) is symmetric about half the harmonic sum, so only the lower
  half of any bitmap needs storing; counts and reads mirror through the
  current center.

Every path returns bit-identical counts, and brute_force_sums gives a
from-scratch oracle for small sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .bitvec import SumsBitmap
from .doubling import compatible
from .errors import CapacityError, format_bytes

_WORD = 64
_BLOCK_WORDS = 1 << 20  # 8 MB scratch blocks for streamed unions

BRUTE_FORCE_LIMIT = 24
SPLIT_SET_LIMIT = 24
SUGGEST_MAX_MULTIPLES = 6


def _check_prime(q: int) -> int:
    if q < 2 or any(q % d == 0 for d in range(2, math.isqrt(q) + 1)):
        raise ValueError(f"split modulus must be prime, got {q}")
    return q


class DenomSet:
    """A finite set of denominators with its common grid.

    elements are sorted distinct positive integers; lcm is their least
    common multiple; harmonic_sum is sum(1/n) exactly.  lcm * harmonic_sum
    is always an integer: one less than the bitmap length the set needs.
    """

    __slots__ = ("elements", "lcm", "harmonic_sum", "_members")

    def __init__(self, elements: Iterable[int]):
        elems = sorted(elements)
        if any(n < 1 for n in elems):
            raise ValueError("denominators must be positive")
        if any(a == b for a, b in zip(elems, elems[1:])):
            raise ValueError("denominators must be distinct")
        self.elements: tuple[int, ...] = tuple(elems)
        self.lcm: int = math.lcm(*elems) if elems else 1
        self.harmonic_sum: Fraction = sum(
            (Fraction(1, n) for n in elems), Fraction(0))
        self._members = frozenset(elems)

    @classmethod
    def of(cls, S: "DenomSet" | Iterable[int]) -> "DenomSet":
        return S if isinstance(S, DenomSet) else cls(S)

    @classmethod
    def range_set(cls, nmax: int) -> "DenomSet":
        if nmax < 1:
            raise ValueError(f"nmax must be >= 1, got {nmax}")
        return cls(range(1, nmax + 1))

    @property
    def scaled_span(self) -> int:
        """lcm * harmonic_sum: the largest value of lcm * E(elements)."""
        total = self.lcm * self.harmonic_sum
        assert total.denominator == 1
        return total.numerator

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, n: int) -> bool:
        return n in self._members

    def __eq__(self, other) -> bool:
        return isinstance(other, DenomSet) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        if len(self.elements) > 8:
            head = ", ".join(map(str, self.elements[:6]))
            return f"DenomSet({{{head}, ...}}, n={len(self.elements)})"
        return f"DenomSet({{{', '.join(map(str, self.elements))}}})"


@dataclass(frozen=True)
class RemovalWitness:
    """Proof that dropping `removed` = m * p^k halves the count.

    Valid against a set S when every multiple of p^k in S is j * p^k with
    j <= m and p not dividing j, and p is compatible with m.  Validity is
    monotone: it survives the removal of any other element, which is what
    makes per-prefix accounting sound.
    """

    removed: int
    m: int
    p: int
    k: int

    def __post_init__(self):
        if self.k < 1 or self.p <= self.m or self.removed != self.m * self.p ** self.k:
            raise ValueError(f"inconsistent witness {self!r}")


@dataclass(frozen=True)
class ReductionTrace:
    witnesses: tuple[RemovalWitness, ...]

    @property
    def removed_elements(self) -> tuple[int, ...]:
        return tuple(w.removed for w in self.witnesses)

    def removals_up_to(self, N: int) -> int:
        return sum(1 for w in self.witnesses if w.removed <= N)

    def __len__(self) -> int:
        return len(self.witnesses)


def _prime_power_split(n: int) -> list[tuple[int, int]]:
    """(p, k) with p^k the full power of p in n, for each prime p | n."""
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            k = 0
            while n % d == 0:
                n //= d
                k += 1
            out.append((d, k))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def removable_witness(S: DenomSet | Iterable[int], n: int) -> RemovalWitness | None:
    """The removal witness for n against S with the largest p^k, if any."""
    ds = DenomSet.of(S)
    if n not in ds:
        raise ValueError(f"{n} is not in the set")
    best = None
    for p, k in _prime_power_split(n):
        pk = p ** k
        m = n // pk
        if p <= m:
            continue
        if not all(s // pk <= m and (s // pk) % p
                   for s in ds.elements if s % pk == 0):
            continue
        if not compatible(m, p):
            continue
        if best is None or pk > best.p ** best.k:
            best = RemovalWitness(n, m, p, k)
    return best


def peel(S: DenomSet | Iterable[int]) -> tuple[DenomSet, ReductionTrace]:
    """Remove doubling elements until none has a witness.

    Scans the current set from the largest element down, removes the first
    element with a witness, and restarts; the trace records removals in
    order.  |E(S cap [1,N])| = 2^r(N) * |E(reduced cap [1,N])| for every N,
    with r(N) the number of removed elements <= N.
    """
    ds = DenomSet.of(S)
    work = list(ds.elements)
    trace: list[RemovalWitness] = []
    while True:
        current = DenomSet(work)
        for n in reversed(work):
            w = removable_witness(current, n)
            if w is not None:
                work.remove(n)
                trace.append(w)
                break
        else:
            break
    return DenomSet(work), ReductionTrace(tuple(trace))


def symmetry_center(S: DenomSet | Iterable[int]) -> Fraction:
    """Half the harmonic sum; x is a subset sum iff 2*center - x is."""
    return DenomSet.of(S).harmonic_sum / 2


def _integer_sums(elements: Sequence[int], scale: int) -> list[int]:
    """All distinct values of scale * (subset sum of 1/n), ascending.

    scale must be a multiple of lcm(elements) so every value is an integer.
    """
    span = sum(scale // n for n in elements)
    if span < (1 << 62):
        arr = np.zeros(1, dtype=np.int64)
        for n in elements:
            arr = np.union1d(arr, arr + np.int64(scale // n))
        return [int(v) for v in arr]
    sums = {0}
    for n in elements:
        c = scale // n
        sums |= {s + c for s in sums}
    return sorted(sums)


def brute_force_sums(S: DenomSet | Iterable[int]) -> list[Fraction]:
    """Every distinct subset sum of {1/n : n in S}, sorted, by enumeration.

    The from-scratch oracle: no peeling, no splitting, no symmetry.
    """
    ds = DenomSet.of(S)
    if len(ds) > BRUTE_FORCE_LIMIT:
        raise CapacityError(
            f"brute force enumerates 2^{len(ds)} subsets; "
            f"the limit is 2^{BRUTE_FORCE_LIMIT}"
        )
    return [Fraction(v, ds.lcm) for v in _integer_sums(ds.elements, ds.lcm)]


# -- bit-level helpers for streamed unions ---------------------------------

_REV8 = np.array([int(f"{i:08b}"[::-1], 2) for i in range(256)], dtype=np.uint8)


def _gather_words(words: np.ndarray, start_bit: int, nwords: int) -> np.ndarray:
    """Words holding bits [start_bit, start_bit + 64*nwords) of a bit array.

    Bits outside the stored range read as zero; start_bit may be negative.
    """
    w, r = divmod(start_bit, _WORD)
    n_src = nwords + (1 if r else 0)
    src = np.zeros(n_src, dtype=np.uint64)
    lo = max(w, 0)
    hi = min(w + n_src, len(words))
    if hi > lo:
        src[lo - w: hi - w] = words[lo:hi]
    if r == 0:
        return src
    return (src[:-1] >> np.uint64(r)) | (src[1:] << np.uint64(_WORD - r))


def _reverse_strip(strip: np.ndarray) -> np.ndarray:
    """Reverse the order of all bits in a little-endian word strip."""
    raw = strip.view(np.uint8)
    return _REV8[raw[::-1]].copy().view(np.uint64)


def _fetch_true_bits(words: np.ndarray, start_bit: int, nwords: int,
                     center: int | None) -> np.ndarray:
    """Bits [start_bit, +64*nwords) of the logical bitmap.

    With center = M, the logical bitmap satisfies bit(v) = bit(M - v) and
    only its lower half is stored: the upper half is reconstructed from the
    mirror image.  ORing the direct and mirrored reads is exact because
    wherever both are stored they agree.
    """
    out = _gather_words(words, start_bit, nwords)
    if center is not None:
        nbits = nwords << 6
        src_start = center - start_bit - nbits + 1
        out |= _reverse_strip(_gather_words(words, src_start, nwords))
    return out


class _Accumulator:
    """Prefix-exact subset-sum bitmap over a fixed grid.

    Insert elements in ascending order; count() after any prefix is the
    number of distinct sums so far.  grid must be a multiple of every
    element; full_span the final scaled harmonic sum, which fixes the
    (possibly halved) allocation up front.
    """

    __slots__ = ("grid", "symmetric", "bm", "m_cur")

    def __init__(self, grid: int, full_span: int, symmetric: bool,
                 budget: int | None):
        self.grid = grid
        self.symmetric = symmetric
        length = (full_span // 2 if symmetric else full_span) + 1
        self.bm = SumsBitmap(length, budget=budget)
        self.bm.set_bit(0)
        self.m_cur = 0  # scaled harmonic sum of the inserted prefix

    def insert(self, n: int) -> None:
        shift = self.grid // n
        self.bm.shift_or_inplace(shift, truncate=self.symmetric)
        self.m_cur += shift

    def count(self) -> int:
        if not self.symmetric:
            return self.bm.popcount()
        M = self.m_cur
        if M % 2 == 0:
            # the center value pairs with itself: count it once
            return 2 * self.bm.popcount_below(M // 2) + self.bm.get_bit(M // 2)
        return 2 * self.bm.popcount_below((M + 1) // 2)

    def union_count(self, shifts: Sequence[int]) -> int:
        """|union over t in shifts of (current sums + t)|, streamed."""
        center = self.m_cur if self.symmetric else None
        out_words = ((max(shifts) + self.m_cur + 1) + _WORD - 1) >> 6
        words = self.bm.words
        total = 0
        pos = 0
        while pos < out_words:
            w = min(_BLOCK_WORDS, out_words - pos)
            base = pos << 6
            block = _fetch_true_bits(words, base - shifts[0], w, center)
            for t in shifts[1:]:
                block |= _fetch_true_bits(words, base - t, w, center)
            total += int(np.bitwise_count(block).sum(dtype=np.int64))
            pos += w
        return total


def _bitmap_bytes(span: int, symmetric: bool) -> int:
    length = (span // 2 if symmetric else span) + 1
    return ((length + _WORD - 1) >> 6) * 8


def _plain_count(ds: DenomSet, symmetry: bool, budget: int | None) -> int:
    acc = _Accumulator(ds.lcm, ds.scaled_span, symmetry, budget)
    for n in ds.elements:
        acc.insert(n)
    return acc.count()


def _split_parts(ds: DenomSet, q: int) -> tuple[list[int], list[int]]:
    a0 = [n for n in ds.elements if n % q]
    b = [n // q for n in ds.elements if n % q == 0]
    return a0, b


def _class_shifts(b_values: list[int], q: int, grid: int) -> list[list[int]]:
    """Shift groups by residue class of the scaled sums of the 1/(q*b) part.

    Values in distinct classes can never collide after shifting, so the
    total count is the sum of one union count per class.
    """
    lb = math.lcm(*b_values)
    stretch = grid // lb
    classes: dict[int, list[int]] = {}
    for j in _integer_sums(b_values, lb):
        v = j * stretch
        classes.setdefault(v % q, []).append((v - v % q) // q)
    return [classes[c] for c in sorted(classes)]


def split_count(A: DenomSet | Iterable[int], q: int, *,
                symmetry: bool = False, budget: int | None = None) -> int:
    """|E(A)| via residue classes mod q.

    The multiples of q contribute a small explicit shift set; the bitmap
    only covers the q-free elements, shrinking the grid by a factor of q.
    A set with no multiples of q passes through to the plain count.
    """
    ds = DenomSet.of(A)
    _check_prime(q)
    a0, b = _split_parts(ds, q)
    if not b:
        return _plain_count(ds, symmetry, budget)
    if len(b) > SPLIT_SET_LIMIT:
        raise CapacityError(
            f"{len(b)} multiples of {q} need 2^{len(b)} shifts; "
            f"the limit is 2^{SPLIT_SET_LIMIT}"
        )
    a0_ds = DenomSet(a0)
    grid = math.lcm(a0_ds.lcm, math.lcm(*b))
    span = sum(grid // n for n in a0)
    acc = _Accumulator(grid, span, symmetry, budget)
    for n in a0:
        acc.insert(n)
    return sum(acc.union_count(shifts)
               for shifts in _class_shifts(b, q, grid))


def count_distinct_sums(S: DenomSet | Iterable[int], *,
                        peel_first: bool = True,
                        split: int | str | None = None,
                        symmetry: bool = False,
                        budget: int | None = None) -> int:
    """|E(S)| by the full pipeline; every flag combination is exact.

    split: None (never), a prime (always split on it), or "auto" (split on
    the suggested prime only when the plain bitmap exceeds the budget).
    """
    ds = DenomSet.of(S)
    factor = 1
    if peel_first:
        ds, trace = peel(ds)
        factor = 1 << len(trace)
    q: int | None
    if split == "auto":
        q = None
        if budget is not None and _bitmap_bytes(ds.scaled_span, symmetry) > budget:
            q = suggest_split(ds)
            if q is None:
                raise CapacityError(
                    f"needs {format_bytes(_bitmap_bytes(ds.scaled_span, symmetry))} "
                    f"and no split modulus is available",
                    required_bytes=_bitmap_bytes(ds.scaled_span, symmetry),
                )
    else:
        q = split
    if q is None:
        return factor * _plain_count(ds, symmetry, budget)
    return factor * split_count(ds, q, symmetry=symmetry, budget=budget)


def suggest_split(reduced: DenomSet | Iterable[int],
                  max_multiples: int = SUGGEST_MAX_MULTIPLES) -> int | None:
    """Largest prime in the set with at most max_multiples multiples there.

    Splitting on it divides the bitmap grid by the prime while keeping the
    explicit shift set small.
    """
    ds = DenomSet.of(reduced)
    best = None
    for n in ds.elements:
        if n > 1 and _prime_power_split(n) == [(n, 1)]:
            count = sum(1 for s in ds.elements if s % n == 0)
            if count <= max_multiples:
                best = n if best is None else max(best, n)
    return best


@dataclass(frozen=True)
class CensusRow:
    N: int
    count: int
    doubles: bool
    removed: bool

    def csv(self) -> str:
        return (f"{self.N},{self.count},"
                f"{'true' if self.doubles else 'false'},"
                f"{'true' if self.removed else 'false'}")


class CensusTable:
    """Exact counts |E({1..N})| for N = 1..Nmax, with doubling flags."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[CensusRow]):
        self.rows: tuple[CensusRow, ...] = tuple(rows)
        prev = 1
        for row in self.rows:
            if row.count <= prev:
                raise ValueError(f"counts must strictly increase at N={row.N}")
            if row.doubles != (row.count == 2 * prev):
                raise ValueError(f"doubling flag wrong at N={row.N}")
            if row.removed and not row.doubles:
                raise ValueError(f"removed but not doubling at N={row.N}")
            prev = row.count

    def count(self, N: int) -> int:
        if not 1 <= N <= len(self.rows):
            raise ValueError(f"N={N} outside computed range 1..{len(self.rows)}")
        return self.rows[N - 1].count

    def counts_dict(self) -> dict[int, int]:
        out = {0: 1}
        out.update({r.N: r.count for r in self.rows})
        return out

    def doubling_indices(self) -> list[int]:
        return [r.N for r in self.rows if r.doubles]

    def removed_indices(self) -> list[int]:
        return [r.N for r in self.rows if r.removed]

    def csv_lines(self) -> list[str]:
        return ["N,count,doubles,removed"] + [r.csv() for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def __repr__(self) -> str:
        return f"CensusTable(1..{len(self.rows)})"


def census_run(nmax: int, *, budget: int | None = None,
               split_modulus: int | str | None = None,
               symmetry: bool = False) -> CensusTable:
    """Exact |E_N| for every N <= nmax.

    Peels {1..nmax} once; the reduced elements accumulate in ascending
    order with a count checkpoint after each, and each prefix count is
    scaled by two per removed element below it.

    split_modulus: None runs the plain bitmap and raises a capacity error
    (with a suggested modulus) if it exceeds the budget; "auto" adopts the
    suggestion only in that case; an explicit prime always splits.
    """
    full = DenomSet.range_set(nmax)
    reduced, trace = peel(full)
    removed_set = set(trace.removed_elements)
    doubling_factor = [0] * (nmax + 1)
    for w in trace.witnesses:
        doubling_factor[w.removed] += 1
    for N in range(1, nmax + 1):
        doubling_factor[N] += doubling_factor[N - 1]

    q: int | None = None
    plain_bytes = _bitmap_bytes(reduced.scaled_span, symmetry)
    if split_modulus is None or split_modulus == "auto":
        if budget is not None and plain_bytes > budget:
            suggestion = suggest_split(reduced)
            if split_modulus is None or suggestion is None:
                raise CapacityError(
                    f"census to {nmax} needs {format_bytes(plain_bytes)} "
                    f"but the budget is {format_bytes(budget)}"
                    + (f"; try splitting on {suggestion}" if suggestion else ""),
                    required_bytes=plain_bytes,
                    suggested_split=suggestion,
                )
            q = suggestion
    else:
        q = _check_prime(int(split_modulus))
        if not any(n % q == 0 for n in reduced.elements):
            q = None  # degenerate split: nothing to separate

    counts: dict[int, int] = {0: 1}
    if q is None:
        acc = _Accumulator(reduced.lcm, reduced.scaled_span, symmetry, budget)
        core = 1
        for N in range(1, nmax + 1):
            if N in reduced:
                acc.insert(N)
                core = acc.count()
            counts[N] = core << doubling_factor[N]
    else:
        a0_all, b_all = _split_parts(reduced, q)
        if len(b_all) > SPLIT_SET_LIMIT:
            raise CapacityError(
                f"{len(b_all)} multiples of {q} need 2^{len(b_all)} shifts; "
                f"the limit is 2^{SPLIT_SET_LIMIT}"
            )
        grid = math.lcm(math.lcm(*a0_all) if a0_all else 1,
                        math.lcm(*b_all))
        span = sum(grid // n for n in a0_all)
        acc = _Accumulator(grid, span, symmetry, budget)
        b_prefix: list[int] = []
        core = 1
        for N in range(1, nmax + 1):
            if N in reduced:
                if N % q == 0:
                    b_prefix.append(N // q)
                else:
                    acc.insert(N)
                if b_prefix:
                    core = sum(acc.union_count(shifts)
                               for shifts in _class_shifts(b_prefix, q, grid))
                else:
                    core = acc.count()
            counts[N] = core << doubling_factor[N]

    rows = [
        CensusRow(N, counts[N], counts[N] == 2 * counts[N - 1], N in removed_set)
        for N in range(1, nmax + 1)
    ]
    return CensusTable(rows)
