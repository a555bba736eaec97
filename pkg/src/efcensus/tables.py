"""Reference count table and the presentation series derived from it.

The package ships the exact values of count(N) for N = 0..154 as data
(`table2.csv`).  This module loads and validates that table, derives the
two summary series used to present the census (a ten-bin histogram of
normalized growth ratios, and the ratio of doubling density to count
entropy), and verifies freshly computed census tables against the
reference, row by row and exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib.resources import files
from typing import Mapping

import mpmath

from .census import CensusTable
from .doubling import doubling_from_counts
from .reporting import BoundReport

_DPS = 50
_EDGE_GUARD = 1e-9


@dataclass(frozen=True)
class ReferenceTable:
    """Exact count(N) for N = 0..max_n; row 0 is 1 and counts strictly increase."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) < 2:
            raise ValueError("reference table needs at least rows 0 and 1")
        if self.counts[0] != 1:
            raise ValueError(f"row 0 must hold count 1, got {self.counts[0]}")
        for n in range(1, len(self.counts)):
            if self.counts[n] <= self.counts[n - 1]:
                raise ValueError(f"counts must strictly increase at N={n}")

    @property
    def max_n(self) -> int:
        return len(self.counts) - 1

    def count(self, n: int) -> int:
        if not 0 <= n <= self.max_n:
            raise ValueError(f"N must be in [0, {self.max_n}], got {n}")
        return self.counts[n]

    def counts_dict(self) -> dict[int, int]:
        return dict(enumerate(self.counts))

    def __repr__(self) -> str:
        return f"ReferenceTable(max_n={self.max_n})"


def load_reference_table() -> ReferenceTable:
    """The bundled exact counts for N = 0..154, validated on load."""
    text = files("efcensus.data").joinpath("table2.csv").read_text()
    rows: dict[int, int] = {}
    for rec in csv.DictReader(text.splitlines()):
        n, c = int(rec["N"]), int(rec["count"])
        if n in rows:
            raise ValueError(f"duplicate row for N={n}")
        rows[n] = c
    if sorted(rows) != list(range(len(rows))):
        raise ValueError("reference rows must cover 0..max contiguously")
    table = ReferenceTable(tuple(rows[n] for n in range(len(rows))))
    if table.max_n != 154:
        raise ValueError(f"bundled table must reach N=154, got {table.max_n}")
    return table


def growth_histogram(table: ReferenceTable) -> tuple[tuple[int, ...], list[int]]:
    """Ten-bin histogram of the growth ratios log2(count(N)/count(N-1)).

    Bin n (1-based) collects the N in [2, max_n] whose ratio lies in
    ((n-1)/10, n/10]; every ratio lands in (0, 1] because counts strictly
    increase and can at most double.  Exact doublings go to bin 10 by
    integer comparison.  The other edges are decided with 50-digit logs;
    any N whose scaled ratio sits within 1e-9 of an integer edge is
    resolved exactly (count(N)^10 against 2^edge * count(N-1)^10) and
    listed in the flagged output for review.  Returns (bins, flagged).
    """
    bins = [0] * 10
    flagged: list[int] = []
    with mpmath.workdps(_DPS):
        ln2 = mpmath.log(2)
        for n in range(2, table.max_n + 1):
            c, p = table.counts[n], table.counts[n - 1]
            if c > 2 * p:
                raise ValueError(f"count more than doubles at N={n}")
            if c == 2 * p:
                bins[9] += 1
                continue
            scaled = 10 * mpmath.log(mpmath.mpf(c) / p) / ln2
            edge = int(mpmath.nint(scaled))
            if abs(scaled - edge) < _EDGE_GUARD:
                which = edge if c ** 10 <= 2 ** edge * p ** 10 else edge + 1
                flagged.append(n)
            else:
                which = int(mpmath.ceil(scaled))
            assert 1 <= which <= 10, (n, which)
            bins[which - 1] += 1
    return tuple(bins), flagged


def ratio_series(table: ReferenceTable) -> list[tuple[int, float]]:
    """y(N) = (doubling indices <= N) * ln2 / ln(count(N)), to 3 decimals.

    The numerator counts how many of 1..N double the census; the denominator
    is the count entropy.  y(1) = 1 and the series drifts down as
    non-doubling N accumulate.
    """
    members = set(doubling_from_counts(table.counts_dict()))
    out: list[tuple[int, float]] = []
    density = 0
    with mpmath.workdps(_DPS):
        ln2 = mpmath.log(2)
        for n in range(1, table.max_n + 1):
            if n in members:
                density += 1
            y = density * ln2 / mpmath.log(table.counts[n])
            out.append((n, round(float(y), 3)))
    return out


def verify_prefix(computed: CensusTable,
                  reference: ReferenceTable) -> BoundReport:
    """Exact row-by-row equality of a computed census against the reference.

    Mismatching rows carry both exact values in their point label (the lhs
    and rhs columns are float renderings and lose precision at this size).
    """
    top = computed.rows[-1].N if computed.rows else 0
    if top > reference.max_n:
        raise ValueError(
            f"computed table reaches N={top}, reference stops at {reference.max_n}")
    rep = BoundReport("prefix_match", f"N in [1, {top}]")
    for row in computed.rows:
        want = reference.counts[row.N]
        ok = row.count == want
        point = (f"N={row.N}" if ok
                 else f"N={row.N} got={row.count} want={want}")
        rep.add("prefix_match", point, float(row.count), float(want),
                slack=0.0 if ok else -1.0)
    return rep
