"""Uniform pass/fail reporting for the numeric verification suites.

Every checker produces one BoundReport: a list of checked points with both
sides of its inequality, the subset that failed, and the minimum slack seen
(slack is oriented so that >= 0 means the point passes).  Reports render to
CSV rows `check,point,lhs,rhs,pass`.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckRow:
    check: str
    point: str
    lhs: float
    rhs: float
    passed: bool

    def csv(self) -> str:
        return (f"{self.check},{self.point},{self.lhs!r},{self.rhs!r},"
                f"{'true' if self.passed else 'false'}")


@dataclass
class BoundReport:
    name: str
    checked_range: str
    rows: list[CheckRow] = field(default_factory=list)
    margin: float | None = None

    def add(self, check: str, point: str, lhs: float, rhs: float,
            slack: float | None = None) -> None:
        """Record one checked point; pass iff slack >= 0 (default lhs - rhs)."""
        s = (lhs - rhs) if slack is None else slack
        self.rows.append(CheckRow(check, point, lhs, rhs, s >= 0))
        if self.margin is None or s < self.margin:
            self.margin = s

    @property
    def violations(self) -> list[CheckRow]:
        return [r for r in self.rows if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.violations

    def csv_lines(self) -> list[str]:
        return ["check,point,lhs,rhs,pass"] + [r.csv() for r in self.rows]

    def summary(self) -> str:
        state = "pass" if self.passed else f"FAIL ({len(self.violations)} violations)"
        return (f"{self.name} [{self.checked_range}]: {len(self.rows)} points, "
                f"min slack {self.margin:.6g}, {state}")


def merge_reports(name: str, reports: list[BoundReport]) -> BoundReport:
    out = BoundReport(name, ", ".join(r.checked_range for r in reports))
    for r in reports:
        out.rows.extend(r.rows)
        if r.margin is not None and (out.margin is None or r.margin < out.margin):
            out.margin = r.margin
    return out
