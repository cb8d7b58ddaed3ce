"""Shared pytest plumbing.

The acceptance suite marks each of its tests with
``@pytest.mark.acceptance(number, label)``.  This plugin collects their
outcomes and prints one pass/fail line per criterion at the end of the
run, plus any report-only lines the tests chose to surface (values that
are deliberately reported rather than asserted).
"""

import pytest

# criterion number -> (label, passed)
_RESULTS = {}

# free-form lines surfaced in the summary without any assertion attached
REPORT_LINES = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(number, label): marks a test as one acceptance "
        "criterion; its outcome is echoed in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, label = marker.args
    relevant = report.when == "call" or (
        report.when == "setup" and report.outcome != "passed")
    if not relevant:
        return
    previous = _RESULTS.get(number, (label, True))[1]
    _RESULTS[number] = (label, previous and report.outcome == "passed")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_RESULTS):
        label, passed = _RESULTS[number]
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} [{word}] {label}")
    if REPORT_LINES:
        terminalreporter.write_sep("-", "reported, not asserted")
        for line in REPORT_LINES:
            terminalreporter.write_line(line)
