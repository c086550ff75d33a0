import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def separable_toy(m=200, d=5, seed=0, margin=0.2):
    """Two linearly separable classes inside the unit ball."""
    from wpbayes.data import Dataset
    r = np.random.default_rng(seed)
    u = r.normal(size=d)
    u /= np.linalg.norm(u)
    X = []
    while len(X) < m:
        x = r.uniform(-1, 1, size=d) / np.sqrt(d)
        if abs(x @ u) >= margin / 2:
            X.append(x)
    X = np.array(X)
    y = (X @ u > 0).astype(int)
    return Dataset(X, y, 2, "toy")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
