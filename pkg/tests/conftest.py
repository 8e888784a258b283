from __future__ import annotations

import numpy as np
import pytest

from roadbench import fixtures
from roadbench.baseline import all_pairs_distances


@pytest.fixture(scope="session")
def fig1():
    return fixtures.fig1()


@pytest.fixture(scope="session")
def small_graphs():
    """A handful of seeded random graphs with their oracle distance matrices."""
    out = []
    for seed, n in [(1, 30), (2, 60), (3, 120)]:
        net = fixtures.random_connected_graph(n, seed)
        out.append((net, all_pairs_distances(net)))
    return out


def v(i: int) -> int:
    """Fixture vertex v_i -> zero-based id."""
    return i - 1


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Remember one acceptance outcome for the end-of-run summary."""
    ACCEPTANCE[criterion] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
