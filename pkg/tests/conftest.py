import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from entangle.state import PureState, cat_state, normalize, tensor_product  # noqa: E402

_ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    def record(label, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def six_qubit_example():
    amps = np.zeros(64)
    for idx in ("000000", "000111", "110000", "110111"):
        amps[int(idx, 2)] = 0.5
    return PureState((2,) * 6, amps)


def epr():
    return cat_state(2)


def ghz():
    return cat_state(3)


def random_state(dims, rng):
    v = rng.standard_normal(int(np.prod(dims))) + 1j * rng.standard_normal(int(np.prod(dims)))
    return normalize(v, dims)


def random_blocked_state(sizes, rng, d=2):
    """Tensor product of independent random blocks of the given party counts."""
    state = random_state((d,) * sizes[0], rng)
    for s in sizes[1:]:
        state = tensor_product(state, random_state((d,) * s, rng))
    return state


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)
