import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from keyguard.scenario import parse_scenario  # noqa: E402

_acceptance_lines: list[str] = []


@pytest.fixture
def make_scenario():
    def _make(trace, fields=({"id": "pw", "input_class": "password"},), **kw):
        data = {"fields": list(fields), "trace": list(trace), "key_hex": kw.pop("key_hex", "4b6579")}
        data.update(kw)
        return parse_scenario(data)

    return _make


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else "FAIL"
    _acceptance_lines.append(f"{verdict}  {name}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
