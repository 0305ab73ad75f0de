import numpy as np
import pytest

from memsat.barthel import GeneratorConfig, generate
from memsat.formula import Formula


@pytest.fixture
def single_clause():
    """(x1 v x2 v x3)"""
    return Formula(3, [[(0, 1), (1, 1), (2, 1)]])


@pytest.fixture(scope="session")
def barthel20():
    return generate(GeneratorConfig(20, seed=7))


@pytest.fixture(scope="session")
def barthel60():
    return generate(GeneratorConfig(60, seed=11))


def random_grid_state(rng: np.random.Generator, num_vars: int, num_clauses: int, xl_max: float):
    """Random in-range state whose components all lie on the Q14 grid."""
    v = rng.integers(-(1 << 14), (1 << 14) + 1, num_vars) / (1 << 14)
    xs = rng.integers(0, (1 << 14) + 1, num_clauses) / (1 << 14)
    xl = rng.integers(1 << 14, int(xl_max * (1 << 14)) + 1, num_clauses) / (1 << 14)
    return v, xs, xl


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(label, passed, detail)``."""

    def record(label: str, passed: bool, detail: str) -> bool:
        _ACCEPTANCE.append((label, bool(passed), detail))
        print(f"{label}: {'PASS' if passed else 'FAIL'} - {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
