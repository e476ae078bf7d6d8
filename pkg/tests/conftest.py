"""Shared fixtures and reference implementations for the test suite."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from macreg.graph import CompatGraph, GraphOrder


def brute_force_cliques(adj: np.ndarray, min_size: int = 1) -> list[tuple[int, ...]]:
    """Reference maximal-clique enumeration by subset search (n <= ~18)."""
    n = adj.shape[0]
    out = []
    nodes = range(n)
    for r in range(1, n + 1):
        for sub in itertools.combinations(nodes, r):
            if not all(adj[i, j] for i, j in itertools.combinations(sub, 2)):
                continue
            if any(
                all(adj[i, v] for i in sub) for v in nodes if v not in sub
            ):
                continue  # extendable, not maximal
            if r >= min_size:
                out.append(tuple(sub))
    return sorted(out)


def random_graph(rng: np.random.Generator, n: int, p: float) -> CompatGraph:
    """Random undirected weighted graph with edge probability p."""
    edges = np.triu(rng.random((n, n)) < p, 1)
    weights = np.triu(rng.random((n, n)), 1) * edges
    weights = weights + weights.T
    return CompatGraph(weights, GraphOrder.FIRST_ORDER)


@pytest.fixture(scope="session", autouse=True)
def warm_clique_kernel():
    """Trigger the one-time JIT compilation of the clique kernel so timed
    tests measure steady-state behavior."""
    rng = np.random.default_rng(0)
    from macreg.cliques import enumerate_maximal_cliques

    enumerate_maximal_cliques(random_graph(rng, 8, 0.5), min_size=1)
