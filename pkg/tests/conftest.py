from fractions import Fraction

import pytest
from hypothesis import strategies as st

from fuzzyid.core import Profile

F = Fraction


def grid_fraction(denominator: int = 100):
    return st.integers(0, denominator).map(lambda k: Fraction(k, denominator))


@st.composite
def profiles(draw, sizes=(1, 2, 3, 5), denominator: int = 100):
    n = draw(st.sampled_from(sizes))
    cells = draw(st.lists(grid_fraction(denominator), min_size=n * n, max_size=n * n))
    return Profile.from_flat(n, cells)


@pytest.fixture
def half():
    return Fraction(1, 2)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE_LINES]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
