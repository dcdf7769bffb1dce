import numpy as np
import pytest

from pcpu.metrics import eval_grid


@pytest.fixture(scope="session")
def grid80():
    return eval_grid(80)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = {}


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance line: ``criterion(k, passed, detail)``."""

    def record(k, passed, detail):
        _CRITERIA[k] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        passed, detail = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
