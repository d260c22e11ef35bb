import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest

from srbm_green.model import ModelParams


@pytest.fixture
def canonical():
    return ModelParams(x1=1.0, x2=1.0)


def pytest_terminal_summary(terminalreporter):
    from _report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
