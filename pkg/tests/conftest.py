import numpy as np
import pytest

from adaptive_consensus.graph import line_graph
from adaptive_consensus.scenario import line3_scenario

CASES = ("a", "b", "c", "d")


@pytest.fixture
def line3():
    return line_graph(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=CASES)
def controlled(request):
    return line3_scenario(request.param, controlled=True)


@pytest.fixture(params=CASES)
def uncontrolled(request):
    return line3_scenario(request.param, controlled=False)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per criterion; the lines are repeated in the terminal summary."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
