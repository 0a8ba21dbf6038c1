import numpy as np
import pytest
from hypothesis import settings

from lagreul.grid import Grid

settings.register_profile("lagreul", max_examples=25, deadline=None)
settings.load_profile("lagreul")


@pytest.fixture
def grid32():
    return Grid(2, 32, 2 * np.pi)


@pytest.fixture
def grid64():
    return Grid(2, 64, 2 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE_LINES, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
