import numpy as np
import pytest

from eigenmc import SimulationConfig, StateGrid


@pytest.fixture
def grid21():
    return StateGrid(0.0, 0.1, 21)


@pytest.fixture
def grid41():
    return StateGrid(80.0, 1.0, 41)


@pytest.fixture
def small_binomial():
    return SimulationConfig(n_paths=2000, master_seed=11)


def random_stochastic(rng, n, sparsity=0.0):
    """Dense or masked random row-stochastic matrix; every row keeps a positive entry."""
    p = rng.random((n, n))
    if sparsity:
        p[rng.random((n, n)) < sparsity] = 0.0
        empty = p.sum(axis=1) == 0
        p[empty, rng.integers(0, n, empty.sum())] = 1.0
    return p / p.sum(axis=1, keepdims=True)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def report(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
