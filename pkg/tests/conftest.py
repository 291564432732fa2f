import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10, derandomize=True)
hypothesis.settings.load_profile("default")

_CRITERIA: dict = {}


@pytest.fixture
def record():
    """Store one acceptance line: ``record(number, passed, detail)``."""

    def _record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")

