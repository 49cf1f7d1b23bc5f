import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from amortrs.syntax import parse_sig, parse_term, parse_trs  # noqa: E402


@pytest.fixture(scope="session")
def queue():
    return parse_trs("queue.trs")


@pytest.fixture(scope="session")
def qsig(queue):
    return parse_sig("queue.sig", queue)


@pytest.fixture(scope="session")
def exp():
    return parse_trs("exp.trs")


@pytest.fixture(scope="session")
def expsig(exp):
    return parse_sig("exp-nat.sig", exp)


@pytest.fixture(scope="session")
def tri():
    return parse_trs("tri.trs")


@pytest.fixture(scope="session")
def trisig(tri):
    return parse_sig("tri.sig", tri)


@pytest.fixture
def term(queue):
    def make(text, **env):
        return parse_term(text, queue.signature, env=env or None)

    return make


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
