import numpy as np
import pytest

from tcm.solver import State
from tcm.spectral import random_band_field, random_solenoidal_field


def random_state(n: int, seed: int, amp: float = 1.0, k_hi: int = 10, slope: float = -2.0) -> State:
    u = random_solenoidal_field(n, (seed, 1), slope, 1, k_hi)
    v = np.stack([random_band_field(n, (seed, 2), slope, 1, k_hi),
                  random_band_field(n, (seed, 3), slope, 1, k_hi)])
    th = random_band_field(n, (seed, 4), slope, 1, k_hi)
    return State(amp * u, amp * v, amp * th)


@pytest.fixture
def grid_x():
    from tcm.spectral import get_grid
    return get_grid(64).x


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE: list[str] = []


def report(num: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {num} [{name}]: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
