import re

import pytest

_LINES: dict[int, str] = {}


def _number(name: str):
    m = re.match(r"test_criterion_(\d+)_", name)
    return int(m.group(1)) if m else None


class Criterion:
    def __init__(self, n: int):
        self.n = n

    def record(self, passed: bool, detail: str) -> None:
        _LINES[self.n] = f"criterion {self.n}: {'PASS' if passed else 'FAIL'}  {detail}"
        assert passed, detail


@pytest.fixture
def criterion(request):
    return Criterion(_number(request.node.name))


def pytest_runtest_logreport(report):
    n = _number(report.nodeid.split("::")[-1])
    if n is not None and report.failed and n not in _LINES:
        _LINES[n] = f"criterion {n}: FAIL  {report.when} error"


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_LINES):
            terminalreporter.write_line(_LINES[n])
