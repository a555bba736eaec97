"""Shared pytest wiring.

Collects the outcome of every acceptance-battery test and prints one
pass/fail line per criterion in the terminal summary, uncaptured, so the
gate's verdict is visible in any log of the run.
"""

import re

_CRITERION = re.compile(r"test_acceptance\.py.*criterion_(\d+)")
_results: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call":
        _results[n] = report.outcome
    elif report.outcome != "passed":  # setup error or skip
        _results.setdefault(n, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        word = "pass" if _results[n] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {word}")
