"""Shared pytest configuration: hypothesis profile and acceptance summary lines."""

from __future__ import annotations

import re

from hypothesis import HealthCheck, settings

import builders

settings.register_profile(
    "relalg",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("relalg")

_ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion\[(\d+)\]")
_outcomes: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = _ACCEPTANCE.search(report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[number] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section(f"acceptance criteria (RELALG_SEED={builders.SEED})")
    for number in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {number}: {_outcomes[number]} - {CRITERIA[number][0]}")
