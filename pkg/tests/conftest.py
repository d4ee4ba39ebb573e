import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stablequad import WEIGHTS, Interval  # noqa: E402


@pytest.fixture
def unit():
    return Interval(-1.0, 1.0)


@pytest.fixture(params=["x_sqrt_one_minus_x3", "cos20pix"])
def mixed_weight(request):
    """The two sign-changing weights of the numerical study."""
    return WEIGHTS[request.param]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
