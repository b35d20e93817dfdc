"""Shared fixtures and the acceptance-criteria summary hook."""

from pathlib import Path

import pytest

from code2api import extractor, prompts

FIXTURES = Path(__file__).parent / "fixtures"

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call":
        _acceptance_outcomes[report.nodeid] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        # setup errors and skips never reach the call phase
        _acceptance_outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[nodeid]
        if outcome == "passed":
            label = "PASS"
        elif outcome == "skipped":
            label = "SKIP"
        else:
            label = "FAIL"
        terminalreporter.write_line(f"{label}  {nodeid.split('::')[-1]}")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def java_bank():
    return prompts.load_bank(language="java")


@pytest.fixture(scope="session")
def python_bank():
    return prompts.load_bank(language="python")


@pytest.fixture(scope="session")
def table1(java_bank):
    """The worked example: context, steps and complete code."""
    return java_bank[0]


@pytest.fixture(scope="session")
def table1_response(table1) -> str:
    """The canned backend output replaying the worked example."""
    steps = {i + 1: s for i, s in enumerate(table1.worked_steps)}
    return extractor.render_response(steps, table1.complete_code)
