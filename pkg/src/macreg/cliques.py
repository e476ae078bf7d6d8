"""Maximal clique enumeration and clique filtering.

Enumeration is Bron-Kerbosch with Tomita-style pivoting, the outer loop
running over a degeneracy ordering. The hot kernel iterates over packed
uint64 bitsets and is JIT-compiled when numba is available; a pure-Python
integer-bitmask implementation of the identical algorithm serves as the
fallback (and as a cross-checking backend in the tests).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from .correspondences import Correspondences
from .errors import BudgetExceeded, MissingNormals, NoClique
from .graph import CompatGraph

try:
    from ._bk_kernel import bk_enumerate_packed as _bk_enumerate_packed
except ImportError:  # pragma: no cover - numba not installed
    _bk_enumerate_packed = None

DEFAULT_CLIQUE_BUDGET = 10_000_000

# Hard cap on total stored clique-node entries (int64 each) in the compiled
# backend, so that graphs with a pathological number of large maximal
# cliques fail fast instead of exhausting memory.
_MAX_STORED_NODES = 1 << 27


@dataclass(frozen=True)
class Clique:
    """A sorted node-index set with its cached weight (sum of internal edge
    weights in the graph it was mined from)."""

    nodes: tuple[int, ...]
    weight: float

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class CliqueFilterParams:
    min_size: int = 3
    top_k: int | None = None
    use_normal_consistency: bool = False
    t_alpha: float = 0.1

    def __post_init__(self):
        if self.min_size < 1:
            raise ValueError("min_size must be at least 1")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be positive")
        if self.t_alpha <= 0:
            raise ValueError("t_alpha must be positive")


def clique_weight(graph: CompatGraph, nodes) -> float:
    """Sum of the graph weights over all node pairs inside the clique."""
    idx = np.asarray(nodes, dtype=np.int64)
    return float(graph.weights[np.ix_(idx, idx)].sum() / 2.0)


def _adjacency_bitmasks(weights: np.ndarray) -> list[int]:
    adj = weights > 0
    packed = np.packbits(adj, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _degeneracy_order(weights: np.ndarray) -> np.ndarray:
    """Repeatedly remove a minimum-degree vertex; ties go to the lowest
    index, which keeps the enumeration deterministic."""
    adj = weights > 0
    n = adj.shape[0]
    deg = adj.sum(axis=1).astype(np.int64)
    alive = np.ones(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    sentinel = n + 1
    for i in range(n):
        masked = np.where(alive, deg, sentinel)
        v = int(masked.argmin())
        order[i] = v
        alive[v] = False
        deg[adj[v] & alive] -= 1
    return order


def _enumerate_python(
    weights: np.ndarray, order: np.ndarray, min_size: int, budget: int
) -> list[tuple[int, ...]]:
    """Recursive integer-bitmask Bron-Kerbosch; returns unsorted node tuples."""
    n = weights.shape[0]
    masks = _adjacency_bitmasks(weights)

    found: list[tuple[int, ...]] = []
    count = 0

    def expand(stack: list[int], p: int, x: int) -> None:
        nonlocal count
        if p == 0 and x == 0:
            count += 1
            if count > budget:
                raise BudgetExceeded(
                    f"maximal clique enumeration exceeded the cap of {budget}"
                )
            if len(stack) >= min_size:
                found.append(tuple(sorted(stack)))
            return
        # Scan X first: an excluded vertex adjacent to all of P kills the
        # whole subtree (nothing here can be maximal).
        n_p = p.bit_count()
        best = -1
        pivot_adj = 0
        w = x
        while w:
            bit = w & -w
            w ^= bit
            cover = (p & masks[bit.bit_length() - 1]).bit_count()
            if cover == n_p:
                return
            if cover > best:
                best = cover
                pivot_adj = masks[bit.bit_length() - 1]
        # Tomita pivot over P, detecting along the way whether P itself is a
        # clique: then R ∪ P is the one maximal clique of this subtree.
        p_internal = 0
        w = p
        while w:
            bit = w & -w
            w ^= bit
            cover = (p & masks[bit.bit_length() - 1]).bit_count()
            p_internal += cover
            if cover > best:
                best = cover
                pivot_adj = masks[bit.bit_length() - 1]
        if p_internal == n_p * (n_p - 1):
            count += 1
            if count > budget:
                raise BudgetExceeded(
                    f"maximal clique enumeration exceeded the cap of {budget}"
                )
            if len(stack) + n_p >= min_size:
                members = list(stack)
                w = p
                while w:
                    bit = w & -w
                    w ^= bit
                    members.append(bit.bit_length() - 1)
                found.append(tuple(sorted(members)))
            return
        cand = p & ~pivot_adj
        while cand:
            bit = cand & -cand
            cand ^= bit
            v = bit.bit_length() - 1
            mv = masks[v]
            stack.append(v)
            expand(stack, p & mv, x & mv)
            stack.pop()
            p &= ~bit
            x |= bit

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n + 1000))
    try:
        seen = 0
        for v in order:
            v = int(v)
            mv = masks[v]
            expand([v], mv & ~seen & ~(1 << v), mv & seen)
            seen |= 1 << v
    finally:
        sys.setrecursionlimit(old_limit)

    return found


def _pack_adjacency_uint64(weights: np.ndarray) -> np.ndarray:
    """(n, ceil(n/64)) uint64 rows; bit i of row v set iff edge v-i exists."""
    adj = np.ascontiguousarray(weights > 0)
    n = adj.shape[0]
    n_words = (n + 63) // 64
    packed8 = np.packbits(adj, axis=1, bitorder="little")
    buf = np.zeros((n, n_words * 8), dtype=np.uint8)
    buf[:, : packed8.shape[1]] = packed8
    return buf.view("<u8")


def _enumerate_compiled(
    weights: np.ndarray, order: np.ndarray, min_size: int, budget: int
) -> list[tuple[int, ...]]:
    """Same enumeration as _enumerate_python via the jitted bitset kernel."""
    adj = _pack_adjacency_uint64(weights)
    status, nodes, offsets = _bk_enumerate_packed(
        adj, np.asarray(order, dtype=np.int64), min_size, budget, _MAX_STORED_NODES
    )
    if status == 1:
        raise BudgetExceeded(
            f"maximal clique enumeration exceeded the cap of {budget}"
        )
    if status == 2:
        raise BudgetExceeded(
            "maximal clique enumeration exceeded the storage cap of "
            f"{_MAX_STORED_NODES} clique-node entries"
        )
    return [
        tuple(sorted(nodes[offsets[i] : offsets[i + 1]].tolist()))
        for i in range(len(offsets) - 1)
    ]


def enumerate_maximal_cliques(
    graph: CompatGraph,
    min_size: int = 3,
    budget: int = DEFAULT_CLIQUE_BUDGET,
) -> list[Clique]:
    """All maximal cliques of the graph with at least min_size nodes, in
    lexicographic node order.

    Raises BudgetExceeded once more than `budget` maximal cliques (of any
    size) have been found, which signals a pathologically dense graph; the
    caller may raise t_cmp and retry.
    """
    n = graph.n
    if n == 0:
        return []
    order = _degeneracy_order(graph.weights)
    if _bk_enumerate_packed is not None:
        found = _enumerate_compiled(graph.weights, order, min_size, budget)
    else:
        found = _enumerate_python(graph.weights, order, min_size, budget)
    found.sort()
    return [Clique(nodes, clique_weight(graph, nodes)) for nodes in found]


def node_guided_select(cliques: list[Clique], n_nodes: int) -> list[Clique]:
    """Keep, for every node, its heaviest containing clique, then remove
    duplicates. Weight ties go to the lexicographically smallest node list.
    The result never exceeds n_nodes cliques."""
    best: dict[int, Clique] = {}
    for c in cliques:
        for v in c.nodes:
            cur = best.get(v)
            if cur is None or c.weight > cur.weight or (
                c.weight == cur.weight and c.nodes < cur.nodes
            ):
                best[v] = c
    unique = {c.nodes: c for c in best.values()}
    return [unique[k] for k in sorted(unique)]


def normal_consistency_filter(clique: Clique, corrs: Correspondences, t_alpha: float) -> bool:
    """True iff every correspondence pair in the clique has similar
    normal-angle differences on the source and target side:
    |sin a_ij^s - sin a_ij^t| < t_alpha. Insensitive to normal sign flips."""
    if not corrs.has_normals:
        raise MissingNormals("normal consistency filtering requires normals")
    idx = np.asarray(clique.nodes, dtype=np.int64)
    ns = corrs.source_normals[idx]
    nt = corrs.target_normals[idx]
    cos_s = np.clip(ns @ ns.T, -1.0, 1.0)
    cos_t = np.clip(nt @ nt.T, -1.0, 1.0)
    sin_s = np.sqrt(1.0 - cos_s * cos_s)
    sin_t = np.sqrt(1.0 - cos_t * cos_t)
    k = len(idx)
    iu = np.triu_indices(k, 1)
    return bool(np.all(np.abs(sin_s[iu] - sin_t[iu]) < t_alpha))


def rank_top_k(cliques: list[Clique], k: int) -> list[Clique]:
    """Cliques by descending weight (ties by smaller node list), truncated
    to k."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return sorted(cliques, key=lambda c: (-c.weight, c.nodes))[:k]


def maximum_clique(
    graph: CompatGraph,
    min_size: int = 3,
    budget: int = DEFAULT_CLIQUE_BUDGET,
) -> Clique:
    """The maximal clique of greatest cardinality; ties broken by greatest
    weight, then by lexicographic node order."""
    cliques = enumerate_maximal_cliques(graph, min_size=min_size, budget=budget)
    if not cliques:
        raise NoClique(f"no clique of size >= {min_size}")
    return min(cliques, key=lambda c: (-len(c.nodes), -c.weight, c.nodes))
