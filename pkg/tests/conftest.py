"""Shared fixtures and the acceptance-criteria summary hook.

Tests marked ``@pytest.mark.acceptance("<criterion>")`` get one PASS/FAIL
line each in the terminal summary, so the acceptance gate is readable at a
glance even inside a long -v run.
"""

import numpy as np
import pytest
from hypothesis import settings

from braindec.labels import SentimentLabel

settings.register_profile("suite", deadline=None)
settings.load_profile("suite")

_acceptance: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(title): one primary acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    # setup errors/skips count against the criterion; teardown noise does not
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance[item.nodeid] = (marker.args[0], status)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_acceptance):
        title, status = _acceptance[nodeid]
        terminalreporter.write_line(f"{status}  {title}")


def make_label(phrase_id: int, klass: int, peak: float = 0.8) -> SentimentLabel:
    """Label peaked on one class, remainder split over the other two."""
    rest = round((1.0 - peak) / 2.0, 6)  # representable at the file's 6 decimals
    probs = [rest, rest, rest]
    probs[klass] = peak
    return SentimentLabel(phrase_id, *probs)


@pytest.fixture
def rng_np():
    return np.random.default_rng(20260815)
