import numpy as np
import pytest

from wikiease import FeatureMatrix

_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")


@pytest.fixture
def identical_pair():
    """Two entities edited by the same two editors."""
    return FeatureMatrix.from_dense([[1, 1], [1, 1]], entities=["a", "b"], features=["u1", "u2"])


@pytest.fixture
def disjoint_pair():
    return FeatureMatrix.from_dense([[1, 0], [0, 1]], entities=["a", "b"], features=["u1", "u2"])


def random_binary(rng, n, m, density=0.4):
    return FeatureMatrix.from_dense((rng.random((n, m)) < density).astype(float))
