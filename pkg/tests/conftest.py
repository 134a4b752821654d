import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[str, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = f"{mark.args[0]:>2}"
    title, ok = _criteria.get(key, (mark.args[1], True))
    if report.when == "call" or report.failed:
        ok = ok and report.passed
    _criteria[key] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria, key=int):
        title, ok = _criteria[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key.strip()}: {title}")
