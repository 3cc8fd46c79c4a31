from __future__ import annotations

import warnings

import numpy as np
import pytest

from gep.snapshot import SnapshotGraph


def random_graph(rng: np.random.Generator, n: int, p: float, directed: bool = False) -> SnapshotGraph:
    edges = []
    for u in range(n):
        for v in range(n):
            if u == v or (not directed and v < u):
                continue
            if rng.random() < p:
                edges.append((u, v))
    return SnapshotGraph.from_edges(edges, nodes=range(n), directed=directed)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _quiet_eigen():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="eigenvector centrality")
        yield


# (number, title, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {title}: {detail}")
