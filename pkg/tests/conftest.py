from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def sort_reference(values, weights):
    """Lower weighted median and deviation by sorting."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.argsort(v, kind="stable")
    cw = np.cumsum(w[order])
    k = int(np.argmax(2.0 * cw >= cw[-1]))
    mu = float(v[order[k]])
    return mu, float(np.dot(w, np.abs(v - mu)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
