import math

import numpy as np
import pytest

from grovlab.qcore import PureState

SQ2 = math.sqrt(2)


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def state(*terms) -> PureState:
    """state((c, "010"), (d, "111"), ...) normalized."""
    v = sum(c * ket(b) for c, b in terms)
    return PureState.from_amplitudes(v, normalize=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running scans")


# ---------------------------------------------------------------- acceptance log

_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion's verdict; the line is printed now and in the summary."""

    def record(number: int, ok: bool, detail: str):
        line = f"ACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
