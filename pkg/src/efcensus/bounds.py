"""Analytic bounds for the distinct-sum counts, with numeric validation.

The census engine produces exact values of count(N) for moderate N.  This
module holds the other half of the story: closed-form lower and upper bounds
for ln(count(N)) built from iterated logarithms, plus a battery of numeric
checks that validate every inequality feeding those bounds on ranges where
exact data exists.

Conventions used throughout:

* exponential tower   e_0 = 1, e_k = exp(e_{k-1});
* shifted tower       h_1 = 1, h_k = exp(h_{k-1}) + 1/4, with
  h_k in [e_{k-1}, e_k];
* iter_log(k, x)      the k-fold natural logarithm ln_k x;
* nested integrals    F_1(z) = ln z for z > h_1, and
  F_k(z) = integral of F_{k-1}(w) dw over [h_{k-1}, ln(z - 1/4)] for
  z > h_k, every F_k extended by zero at and below its threshold h_k.
  Each F_k is continuous, non-decreasing, and positive past h_k.

The nested integrals arise from a recursive integral inequality satisfied
by the density of doubling indices; slack_constant(k) is the constant a_k
absorbed when flattening F_k into a plain product of iterated logarithms
(F_k(z) >= ln z ... ln_k z - a_k ln z ... ln_{k-1} z past e_k).

Towers and iterated logs run in mpmath so hypothesis gates near their
boundaries are decided with headroom.  Quadrature runs in doubles with an
absolute tolerance of 1e-10, far below every margin it is compared against.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Optional, Sequence

import mpmath
import numpy as np

from .arith import PrimeTable, default_prime_table, scaled_harmonic
from .reporting import BoundReport, merge_reports

_DPS = 30

# e_4 is about 10**1656520 and still fits in an mpf; e_5 does not.  The
# shifted tower lags one level behind: h_5 fits, h_6 does not.
TOWER_CAP = 4
SHIFTED_TOWER_CAP = 5

SIMPSON_TOL = 1e-10

_H2 = math.e + 0.25


@lru_cache(maxsize=None)
def _exp_tower(k: int) -> mpmath.mpf:
    with mpmath.workdps(_DPS):
        return mpmath.mpf(1) if k == 0 else mpmath.exp(_exp_tower(k - 1))


@lru_cache(maxsize=None)
def _shifted_tower(k: int) -> mpmath.mpf:
    with mpmath.workdps(_DPS):
        if k == 1:
            return mpmath.mpf(1)
        return mpmath.exp(_shifted_tower(k - 1)) + mpmath.mpf(1) / 4


@dataclass(frozen=True)
class TowerValue:
    """One level of an exponential tower; value None marks an unrepresentable level."""

    k: int
    value: Optional[mpmath.mpf]

    @property
    def too_large(self) -> bool:
        return self.value is None

    def __repr__(self) -> str:
        if self.too_large:
            return f"TowerValue(k={self.k}, too large)"
        return f"TowerValue(k={self.k}, value={mpmath.nstr(self.value, 12)})"


def towers(k: int) -> tuple[TowerValue, TowerValue]:
    """The pair (e_k, h_k) of tower values at level k >= 1.

    Levels past the representable range carry the too-large marker instead
    of a number.  For every level where both sides are representable the
    sandwich e_{k-1} <= h_k <= e_k is asserted.
    """
    if k < 1:
        raise ValueError(f"tower level must be >= 1, got {k}")
    e_val = _exp_tower(k) if k <= TOWER_CAP else None
    h_val = _shifted_tower(k) if k <= SHIFTED_TOWER_CAP else None
    if h_val is not None:
        assert _exp_tower(k - 1) <= h_val, (k, h_val)
        if e_val is not None:
            assert h_val <= e_val, (k, h_val)
    return TowerValue(k, e_val), TowerValue(k, h_val)


def iter_log(k: int, x) -> mpmath.mpf:
    """The k-fold natural logarithm ln_k x; iter_log(0, x) = x.

    Every intermediate value must stay positive so the next logarithm is
    defined (the final value may be <= 0); a violation raises ValueError.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    with mpmath.workdps(_DPS):
        v = mpmath.mpmathify(x)
        for i in range(k):
            if v <= 0:
                raise ValueError(
                    f"iter_log({k}, {x}): logarithm undefined after {i} levels")
            v = mpmath.log(v)
        return v


def _gated_iter_log(k: int, x) -> Optional[mpmath.mpf]:
    try:
        return iter_log(k, x)
    except ValueError:
        return None


def log_count_lower(N: int, k: int) -> Optional[float]:
    """Lower bound for ln(count(N)), or None when the gate for this k fails.

    The bound is 2 ln2 (N / ln N) times a k-dependent factor: 1 when k <= 2
    (gate ln_2 N >= 1); ln_3 N when k = 3 (gate ln_3 N >= 1); and
    (1 - (3/2)/ln_k N) prod_{j=3..k} ln_j N when k >= 4 (gate ln_k N >= 3/2).
    """
    if N < 1 or k < 1:
        raise ValueError(f"need N >= 1 and k >= 1, got N={N}, k={k}")
    with mpmath.workdps(_DPS):
        if k <= 2:
            gate = _gated_iter_log(2, N)
            if gate is None or gate < 1:
                return None
            factor = mpmath.mpf(1)
        elif k == 3:
            gate = _gated_iter_log(3, N)
            if gate is None or gate < 1:
                return None
            factor = gate
        else:
            gate = _gated_iter_log(k, N)
            if gate is None or gate < mpmath.mpf(3) / 2:
                return None
            factor = 1 - (mpmath.mpf(3) / 2) / gate
            for j in range(3, k + 1):
                factor *= iter_log(j, N)
        return float(2 * mpmath.log(2) * N / mpmath.log(N) * factor)


def log_count_upper(N: int, k: int) -> Optional[float]:
    """Upper bound (N ln_k N / ln N) prod_{j=3..k} ln_j N for ln(count(N)).

    Available when ln_{2k} N >= 1, else None.  At k = 1 the product is empty
    and the logs cancel, so the bound degenerates to N itself.
    """
    if N < 1 or k < 1:
        raise ValueError(f"need N >= 1 and k >= 1, got N={N}, k={k}")
    with mpmath.workdps(_DPS):
        gate = _gated_iter_log(2 * k, N)
        if gate is None or gate < 1:
            return None
        val = N * iter_log(k, N) / mpmath.log(N)
        for j in range(3, k + 1):
            val *= iter_log(j, N)
        return float(val)


def _adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                      tol: float) -> float:
    """Adaptive Simpson quadrature with Richardson correction, |error| <~ tol."""
    if b <= a:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 48)


def _simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    half = 0.5 * tol
    return (_simpson_rec(f, a, lm, m, fa, flm, fm, left, half, depth - 1)
            + _simpson_rec(f, m, rm, b, fm, frm, fb, right, half, depth - 1))


def _second_closed(z: float) -> float:
    # antiderivative of ln over [1, L], L = ln(z - 1/4): value L ln L - L + 1
    if z <= _H2:
        return 0.0
    L = math.log(z - 0.25)
    return L * math.log(L) - L + 1.0


def _second_by_quadrature(z: float) -> float:
    """F_2 via Simpson instead of the antiderivative; validates the quadrature."""
    if z <= _H2:
        return 0.0
    upper = math.log(z - 0.25)
    return _adaptive_simpson(lambda w: math.log(w), 1.0, upper, SIMPSON_TOL)


def iterated_integral(k: int, z) -> float:
    """F_k(z) for k in {1, 2, 3} and z >= 0.

    F_1 is the plain logarithm above 1; F_2 uses its exact antiderivative;
    F_3 integrates F_2 by adaptive Simpson from h_2 up to ln(z - 1/4).
    Values at or below the threshold h_k are exactly 0.  Levels past 3 would
    need arguments beyond any representable tower, so they are rejected.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"nested integral level must be 1, 2 or 3, got {k}")
    z = float(z)
    if z < 0:
        raise ValueError(f"argument must be >= 0, got {z}")
    if k == 1:
        return math.log(z) if z > 1.0 else 0.0
    if k == 2:
        return _second_closed(z)
    h3 = float(_shifted_tower(3))
    if z <= h3:
        return 0.0
    return _adaptive_simpson(_second_closed, _H2, math.log(z - 0.25), SIMPSON_TOL)


def slack_constant(k: int) -> float:
    """The constant a_k in the product form of the nested integrals, k >= 3.

    a_3 = 1.28 and a_k = a_{k-1} + 1/e_{k-2} + (k-2)/(e_{k-2} e_{k-3}).
    Increments involving towers past the representable range are below any
    floating-point scale and contribute nothing.  The sequence increases to
    a limit below 1.4, which is asserted.
    """
    if k < 3:
        raise ValueError(f"slack constant starts at k = 3, got {k}")
    with mpmath.workdps(_DPS):
        a = mpmath.mpf("1.28")
        for j in range(4, k + 1):
            if j - 2 > TOWER_CAP:
                break
            a += (1 / _exp_tower(j - 2)
                  + mpmath.mpf(j - 2) / (_exp_tower(j - 2) * _exp_tower(j - 3)))
        assert a < mpmath.mpf("1.4"), a
        return float(a)


# ---------------------------------------------------------------------------
# Numeric validation battery.  Each check returns a BoundReport whose rows
# carry both sides of its inequality; slack is oriented so >= 0 passes.


def _sorted_members(members: Iterable[int]) -> list[int]:
    ms = sorted(set(int(u) for u in members))
    if not ms or ms[0] < 1:
        raise ValueError("doubling-index data must be positive integers")
    return ms


def _density(sorted_members: Sequence[int], x: float) -> int:
    return bisect.bisect_right(sorted_members, x)


def _require_coverage(sorted_members: Sequence[int], x_max: int) -> None:
    # Completeness of the data is the caller's contract, but a truncated
    # list is cheap to catch: every prime is a doubling index, so the
    # largest prime <= x_max must be present.
    p = x_max
    while p > 1 and any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        p -= 1
    if not sorted_members or sorted_members[-1] < p:
        raise ValueError(f"doubling data does not cover [1, {x_max}]")


def check_prime_count_ceiling(table: Optional[PrimeTable] = None,
                              m_max: int = 16) -> BoundReport:
    """pi(g_m) <= 18*3^m / (m ln(18*3^m)) for 1 <= m <= m_max.

    g_m = lcm(1..m) * (1 + ... + 1/m) bounds the numerators reachable by
    the compatibility enumeration at m, so this caps how many primes can be
    incompatible with any single m.  pi is exact from the sieve.
    """
    table = table or default_prime_table()
    rep = BoundReport("prime_count_ceiling", f"m in [1, {m_max}]")
    with mpmath.workdps(_DPS):
        for m in range(1, m_max + 1):
            cap = 18 * 3 ** m
            lhs = table.pi(scaled_harmonic(m))
            rhs = float(cap / (m * mpmath.log(cap)))
            rep.add("prime_count_ceiling", f"m={m}", float(lhs), rhs,
                    slack=rhs - lhs)
    return rep


def check_prime_floor(table: Optional[PrimeTable] = None,
                      t_max: int = 100_000) -> BoundReport:
    """pi(t) >= t / ln t for every real t in [17, t_max + 1).

    Within a strip [n, n+1) the left side is the constant pi(n) while the
    right side stays below its value at n+1, so one comparison per integer
    covers the strip.  Only the minimum-slack point is reported as a row;
    any violating strips would get rows of their own.
    """
    table = table or default_prime_table()
    ns = np.arange(17, t_max + 1, dtype=np.int64)
    pis = np.searchsorted(table.primes, ns, side="right")
    rhs = (ns + 1) / np.log(ns + 1.0)
    slack = pis - rhs
    rep = BoundReport("prime_floor", f"t in [17, {t_max + 1})")
    for i in np.nonzero(slack < 0)[0][:32]:
        rep.add("prime_floor", f"t in [{ns[i]},{ns[i] + 1})",
                float(pis[i]), float(rhs[i]))
    i = int(np.argmin(slack))
    rep.add("prime_floor", f"t in [{ns[i]},{ns[i] + 1})",
            float(pis[i]), float(rhs[i]))
    return rep


def check_integral_constant(members: Iterable[int]) -> BoundReport:
    """The step integral of density(v)/v^2 over [1, e^e] is at least 2.2.

    density(v) counts doubling indices <= v, so the integral telescopes to
    sum(1/u) - count/Y over the members u <= Y, with Y = e^e.  The check
    replaces Y by a certified rational lower bound y from interval
    arithmetic; the integrand is nonnegative, so integrating only to y can
    only lose mass, and the comparison itself runs in exact rationals.
    """
    ms = _sorted_members(members)
    old = mpmath.iv.dps
    try:
        mpmath.iv.dps = _DPS
        enclosure = mpmath.iv.exp(mpmath.iv.exp(1))
        lo = mpmath.mpf(enclosure.a)
    finally:
        mpmath.iv.dps = old
    sign, man, exp, _ = lo._mpf_
    y = Fraction(-man if sign else man) * Fraction(2) ** exp
    assert 15 < y < 16, y
    inside = [u for u in ms if u <= y]
    value = sum(Fraction(1, u) for u in inside) - Fraction(len(inside)) / y
    rep = BoundReport("integral_constant", "[1, e^e]")
    rep.add("integral_constant", f"y={float(y):.9f}", float(value), 2.2,
            slack=float(value - Fraction(11, 5)))
    return rep


def check_step_integral(members: Iterable[int], x_max: int = 154) -> BoundReport:
    """density(x) >= (x/ln x) * integral_1^y density(v)/v^2 dv on feasible (x, y).

    The hypothesis is y >= 1 and x >= 18*3^y, so x runs over [54, x_max] and
    y over [1, ln(x/18)/ln 3].  Up to x_max = 154 that keeps y below 2,
    where the step integral is exactly 1 - 1/y and increases in y; the whole
    right side also increases in x.  Checking density(n) against the bound
    at x = n+1 with y maximal therefore covers every real (x, y) pair with
    x in [n, n+1], one row per integer strip.
    """
    ms = _sorted_members(members)
    _require_coverage(ms, x_max)
    ln3 = math.log(3.0)
    rep = BoundReport("step_integral", f"x in [54, {x_max}]")
    for n in range(54, x_max):
        x_r = n + 1
        y_max = math.log(x_r / 18.0) / ln3
        assert 1.0 < y_max < 2.0, (n, y_max)
        rhs = x_r / math.log(x_r) * (1.0 - 1.0 / y_max)
        rep.add("step_integral", f"x in [{n},{x_r}]", float(_density(ms, n)), rhs)
    return rep


def check_growth_floor(members: Iterable[int], x_max: int = 154) -> BoundReport:
    """(ln x / x) * density(x) >= 2 F_1(ln_2 x) at integer points x in [3, x_max].

    This is the base case of the recursive density bound, evaluated wherever
    the doubling data is exact.
    """
    ms = _sorted_members(members)
    _require_coverage(ms, x_max)
    rep = BoundReport("growth_floor", f"x in [3, {x_max}]")
    for x in range(3, x_max + 1):
        z = math.log(math.log(x))
        lhs = math.log(x) / x * _density(ms, x)
        rep.add("growth_floor", f"x={x}", lhs, 2.0 * iterated_integral(1, z))
    return rep


def check_product_floor(grid_points: int = 60) -> BoundReport:
    """F_k(z) >= ln z ... ln_k z - a_k ln z ... ln_{k-1} z on geometric grids.

    Checked for k = 2 (a_2 = 1) on [h_2, 10^6] and k = 3 (a_3 = 1.28) on
    [h_3, 10^6].  Below e_k the right side is negative and the inequality is
    vacuous; the grids still exercise that region.
    """
    rep = BoundReport("product_floor", "z in [h_k, 1e6], k in {2, 3}")
    for k, a_k in ((2, 1.0), (3, slack_constant(3))):
        h_k = float(_shifted_tower(k))
        ratio = (1e6 / h_k) ** (1.0 / (grid_points - 1))
        for i in range(grid_points):
            z = h_k * ratio ** i
            logs = [math.log(z)]
            for _ in range(k - 1):
                logs.append(math.log(logs[-1]))
            rhs = math.prod(logs) - a_k * math.prod(logs[:-1])
            rep.add(f"product_floor_f{k}", f"z={z:.6g}",
                    iterated_integral(k, z), rhs)
    return rep


def check_count_sandwich(counts: Mapping[int, int]) -> BoundReport:
    """log_count_lower(N,1) <= ln(count(N)) <= log_count_upper(N,1) on a table.

    Gates limit both bounds to ln_2 N >= 1, so rows appear for N >= 16 only;
    within Table range no deeper k ever gates on.
    """
    rep = BoundReport("count_sandwich", f"N in [16, {max(counts, default=0)}]")
    with mpmath.workdps(_DPS):
        for N in sorted(counts):
            if N < 1:
                continue
            lower = log_count_lower(N, 1)
            upper = log_count_upper(N, 1)
            if lower is None and upper is None:
                continue
            ln_c = float(mpmath.log(counts[N]))
            if lower is not None:
                rep.add("count_lower", f"N={N}", ln_c, lower)
            if upper is not None:
                rep.add("count_upper", f"N={N}", ln_c, upper, slack=upper - ln_c)
    return rep


def analytic_checks(members: Iterable[int],
                    table: Optional[PrimeTable] = None) -> BoundReport:
    """Full validation battery against exact doubling data up to 154."""
    ms = _sorted_members(members)
    return merge_reports("analytic_checks", [
        check_prime_count_ceiling(table),
        check_integral_constant(ms),
        check_step_integral(ms),
        check_growth_floor(ms),
        check_product_floor(),
    ])


# Opaque group ids used by the command-line interface.
CHECK_GROUPS = ("3c", "6c", "7c", "9c", "t1")


def run_check_group(token: str, *,
                    members: Optional[Iterable[int]] = None,
                    counts: Optional[Mapping[int, int]] = None,
                    table: Optional[PrimeTable] = None) -> BoundReport:
    """Evaluate one named check group.

    Groups "6c" and "7c" need exact doubling indices through 154; group "t1"
    needs a table of exact counts.  Group "3c" runs both sieve checks.
    """
    if token == "3c":
        return merge_reports("3c", [check_prime_count_ceiling(table),
                                    check_prime_floor(table)])
    if token == "6c":
        if members is None:
            raise ValueError("check group '6c' needs doubling-index data")
        ms = _sorted_members(members)
        return merge_reports("6c", [check_integral_constant(ms),
                                    check_step_integral(ms)])
    if token == "7c":
        if members is None:
            raise ValueError("check group '7c' needs doubling-index data")
        return check_growth_floor(members)
    if token == "9c":
        return check_product_floor()
    if token == "t1":
        if counts is None:
            raise ValueError("check group 't1' needs a table of exact counts")
        return check_count_sandwich(counts)
    raise ValueError(f"unknown check group {token!r}; "
                     f"expected one of {', '.join(CHECK_GROUPS)}")
