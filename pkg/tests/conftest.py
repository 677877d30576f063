"""Shared fixtures plus a terminal summary that prints one PASS/FAIL line
per acceptance criterion (the tests named test_a1 .. test_a10)."""

from __future__ import annotations

import re

import pytest

import dewatselect

_ACCEPTANCE_RE = re.compile(r"test_acceptance\.py::test_(a\d+)")
_acceptance_outcomes: dict[str, str] = {}


@pytest.fixture(scope="session")
def performance_table():
    return dewatselect.load_performance_table(
        str(dewatselect.fixture_path("paper_tables.csv")))


@pytest.fixture(scope="session")
def injections_doc():
    import json

    return json.loads(dewatselect.fixture_path("table41_qual_cols.json").read_text())


def pytest_runtest_logreport(report):
    match = _ACCEPTANCE_RE.search(report.nodeid)
    if not match:
        return
    key = match.group(1).upper()
    if report.when == "call":
        _acceptance_outcomes[key] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.outcome in ("failed", "skipped"):
        _acceptance_outcomes[key] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_acceptance_outcomes, key=lambda k: int(k[1:])):
        terminalreporter.write_line(f"{key}: {_acceptance_outcomes[key]}")
