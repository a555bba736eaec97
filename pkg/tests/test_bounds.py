"""Towers, iterated logs, nested integrals, and the numeric check battery."""

import csv
import math
from importlib.resources import files

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efcensus import bounds
from efcensus.bounds import (
    analytic_checks,
    check_count_sandwich,
    check_growth_floor,
    check_integral_constant,
    check_prime_count_ceiling,
    check_prime_floor,
    check_product_floor,
    check_step_integral,
    iter_log,
    iterated_integral,
    log_count_lower,
    log_count_upper,
    run_check_group,
    slack_constant,
    towers,
)
from efcensus.doubling import doubling_from_counts

E2 = 15.154262241479264
H2 = math.e + 0.25
H3 = 19.70845788921072


def bundled_counts():
    text = files("efcensus.data").joinpath("table2.csv").read_text()
    return {int(r["N"]): int(r["count"]) for r in csv.DictReader(text.splitlines())}


def bundled_members():
    return doubling_from_counts(bundled_counts())


class TestTowers:
    def test_first_levels(self):
        e1, h1 = towers(1)
        assert float(e1.value) == pytest.approx(math.e)
        assert float(h1.value) == 1.0
        e2, h2 = towers(2)
        assert float(e2.value) == pytest.approx(E2, rel=1e-12)
        assert float(h2.value) == pytest.approx(H2, rel=1e-12)
        e3, h3 = towers(3)
        assert float(e3.value) == pytest.approx(3814279.10476, rel=1e-9)
        assert float(h3.value) == pytest.approx(H3, rel=1e-12)

    def test_level_four(self):
        e4, h4 = towers(4)
        assert float(mpmath.log10(e4.value)) == pytest.approx(1656520.368, abs=1e-2)
        assert float(h4.value) == pytest.approx(362472037.0, rel=1e-9)

    def test_markers(self):
        e5, h5 = towers(5)
        assert e5.too_large and not h5.too_large
        e6, h6 = towers(6)
        assert e6.too_large and h6.too_large
        assert "too large" in repr(e5)

    def test_sandwich(self):
        # h_k between adjacent tower levels, wherever representable
        for k in range(1, 5):
            e_k, h_k = towers(k)
            e_prev, _ = towers(k - 1) if k > 1 else (None, None)
            lo = float(bounds._exp_tower(k - 1))
            assert lo <= float(h_k.value) <= float(e_k.value)

    def test_bad_level(self):
        with pytest.raises(ValueError):
            towers(0)


class TestIterLog:
    def test_base_cases(self):
        assert float(iter_log(0, 5)) == 5.0
        assert float(iter_log(1, math.e)) == pytest.approx(1.0, abs=1e-15)
        assert float(iter_log(2, 154)) == pytest.approx(1.6168, abs=1e-3)

    def test_tower_identities(self):
        for k in range(1, 5):
            e_k, _ = towers(k)
            assert abs(iter_log(k, e_k.value) - 1) < 1e-25
            e_prev = bounds._exp_tower(k - 1)
            assert abs(iter_log(k, e_prev)) < 1e-25

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            iter_log(2, 1)  # second log of 0
        with pytest.raises(ValueError):
            iter_log(1, 0)
        with pytest.raises(ValueError):
            iter_log(-1, 5)

    @given(st.integers(min_value=0, max_value=2),
           st.integers(min_value=0, max_value=2),
           st.floats(min_value=20.0, max_value=1e9))
    @settings(max_examples=60, deadline=None)
    def test_composition(self, i, j, x):
        lhs = iter_log(i + j, x)
        rhs = iter_log(j, iter_log(i, x))
        assert abs(lhs - rhs) < 1e-20


class TestLogCountLower:
    def test_gate_boundary(self):
        assert log_count_lower(16, 1) == 8.0
        assert log_count_lower(15, 1) is None
        assert log_count_lower(16, 2) == 8.0  # same case as k = 1

    def test_third_level_gate(self):
        # the gate flips exactly where the triple log crosses 1
        assert log_count_lower(3814279, 3) is None
        val = log_count_lower(3814280, 3)
        assert val is not None
        base = 2 * math.log(2) * 3814280 / math.log(3814280)
        assert val == pytest.approx(base, rel=1e-6)

    def test_deep_levels_absent(self):
        assert log_count_lower(154, 4) is None
        assert log_count_lower(10 ** 9, 5) is None

    def test_validation(self):
        with pytest.raises(ValueError):
            log_count_lower(0, 1)
        with pytest.raises(ValueError):
            log_count_lower(10, 0)


class TestLogCountUpper:
    def test_values(self):
        assert log_count_upper(154, 1) == 154.0
        assert log_count_upper(16, 1) == 16.0

    def test_gates(self):
        assert log_count_upper(10, 1) is None
        assert log_count_upper(10 ** 6, 2) is None  # needs ln_4 N >= 1


class TestIteratedIntegral:
    def test_level_one(self):
        assert iterated_integral(1, math.e) == pytest.approx(1.0)
        assert iterated_integral(1, 1.0) == 0.0
        assert iterated_integral(1, 0.3) == 0.0
        assert iterated_integral(1, 0) == 0.0

    def test_level_two(self):
        assert iterated_integral(2, H2) == 0.0
        assert iterated_integral(2, math.exp(math.e) + 0.25) == pytest.approx(
            1.0, abs=1e-12)

    def test_level_three(self):
        assert iterated_integral(3, H3) == 0.0
        assert iterated_integral(3, 1e6) == pytest.approx(
            4.812992586553407, rel=1e-9)

    def test_thresholds_and_monotonicity(self):
        for k in (1, 2, 3):
            h_k = float(bounds._shifted_tower(k))
            assert iterated_integral(k, h_k) == 0.0
            assert 0 < iterated_integral(k, h_k * (1 + 1e-6)) < 1e-3
            grid = [h_k * (1e6 / h_k) ** (i / 40) for i in range(41)]
            vals = [iterated_integral(k, z) for z in grid]
            assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            iterated_integral(4, 100.0)
        with pytest.raises(ValueError):
            iterated_integral(1, -0.5)

    def test_quadrature_matches_antiderivative(self):
        z = H2 * 1.0001
        while z <= 1e6:
            closed = bounds._second_closed(z)
            quad = bounds._second_by_quadrature(z)
            assert quad == pytest.approx(closed, rel=1e-9)
            z *= 1.9

    @given(st.floats(min_value=3.5, max_value=1e6))
    @settings(max_examples=60, deadline=None)
    def test_quadrature_property(self, z):
        assert bounds._second_by_quadrature(z) == pytest.approx(
            bounds._second_closed(z), rel=1e-9, abs=1e-12)


class TestSlackConstant:
    def test_values(self):
        assert slack_constant(3) == pytest.approx(1.28)
        assert slack_constant(4) == pytest.approx(1.3945393193468618, rel=1e-9)
        assert slack_constant(9) == pytest.approx(1.3945396334203932, rel=1e-9)

    def test_monotone_below_cap(self):
        vals = [slack_constant(k) for k in range(3, 12)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert all(v < 1.4 for v in vals)
        assert vals[-1] == vals[-2]  # stabilizes once towers overflow

    def test_validation(self):
        with pytest.raises(ValueError):
            slack_constant(2)


class TestCheckBattery:
    def test_prime_count_ceiling(self):
        rep = check_prime_count_ceiling()
        assert rep.passed and len(rep.rows) == 16
        assert rep.margin == pytest.approx(13.5373, abs=1e-3)  # m = 1 binds
        by_point = {r.point: r for r in rep.rows}
        assert by_point["m=1"].lhs == 0.0
        assert by_point["m=5"].lhs == 33.0  # primes up to 137
        assert by_point["m=5"].rhs == pytest.approx(104.3, abs=0.1)
        assert by_point["m=16"].lhs == 178765.0

    def test_prime_floor(self):
        rep = check_prime_floor()
        assert rep.passed
        assert rep.margin == pytest.approx(0.387748, abs=1e-4)

    def test_integral_constant(self):
        rep = check_integral_constant(bundled_members())
        assert rep.passed and len(rep.rows) == 1
        row = rep.rows[0]
        assert row.lhs == pytest.approx(2.2097059, abs=1e-6)
        assert row.rhs == 2.2
        assert rep.margin == pytest.approx(0.0097059, abs=1e-6)

    def test_step_integral(self):
        rep = check_step_integral(bundled_members())
        assert rep.passed and len(rep.rows) == 100
        assert rep.margin == pytest.approx(34.3387, abs=1e-2)

    def test_growth_floor(self):
        rep = check_growth_floor(bundled_members())
        assert rep.passed and len(rep.rows) == 152
        assert rep.margin == pytest.approx(math.log(3), abs=1e-9)

    def test_product_floor(self):
        rep = check_product_floor()
        assert rep.passed and len(rep.rows) == 120
        assert rep.margin == pytest.approx(0.97574, abs=1e-3)

    def test_count_sandwich(self):
        rep = check_count_sandwich(bundled_counts())
        assert rep.passed and len(rep.rows) == 278  # two rows per N in 16..154
        assert rep.margin == pytest.approx(math.log(19328) - 8.0, abs=1e-9)
        assert rep.rows[0].point == "N=16"

    def test_sandwich_catches_corruption(self):
        corrupt = dict(bundled_counts())
        corrupt[30] = corrupt[30] * 10 ** 40  # pushes ln past the upper bound
        rep = check_count_sandwich(corrupt)
        assert not rep.passed
        assert any(r.point == "N=30" and not r.passed for r in rep.rows)

    def test_coverage_guard(self):
        truncated = [u for u in bundled_members() if u <= 100]
        with pytest.raises(ValueError):
            check_growth_floor(truncated)
        with pytest.raises(ValueError):
            check_step_integral(truncated)

    def test_analytic_checks_merged(self):
        rep = analytic_checks(bundled_members())
        assert rep.passed and len(rep.rows) == 389
        assert rep.margin == pytest.approx(0.0097059, abs=1e-6)

    def test_run_check_group(self):
        members, counts = bundled_members(), bundled_counts()
        for token, nrows in (("3c", 17), ("6c", 101), ("7c", 152),
                             ("9c", 120), ("t1", 278)):
            rep = run_check_group(token, members=members, counts=counts)
            assert rep.passed and len(rep.rows) == nrows, token

    def test_run_check_group_validation(self):
        with pytest.raises(ValueError):
            run_check_group("zz")
        with pytest.raises(ValueError):
            run_check_group("6c")
        with pytest.raises(ValueError):
            run_check_group("t1")

    def test_csv_shape(self):
        lines = check_count_sandwich(bundled_counts()).csv_lines()
        assert lines[0] == "check,point,lhs,rhs,pass"
        assert lines[1].startswith("count_lower,N=16,") and lines[1].endswith("true")
