import math

import pytest

from gentqd.protocols import LZParams

DELTA = 4 * math.pi  # 2 pi x 2 kHz in rad/ms
THETA0 = math.pi / 3

_acceptance_lines = []


def record_acceptance(number: int, title: str, ok: bool, detail: str = ""):
    _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
                             + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return LZParams(DELTA, THETA0, 1.0)
