"""JIT-compiled Bron-Kerbosch over packed uint64 adjacency bitsets.

This module mirrors the pure-Python enumeration in cliques.py: degeneracy
outer loop, Tomita pivot chosen from P union X, subtree pruning when an
excluded vertex dominates P, and direct emission when P is itself a clique.
Importing it requires numba; cliques.py falls back to the Python
implementation when the import fails.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U0 = np.uint64(0)
_U1 = np.uint64(1)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)
_W63 = np.uint64(63)


@njit(cache=True, inline="always")
def _popcnt(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return np.int64((x * _H01) >> _S56)


@njit(cache=True)
def bk_enumerate_packed(adj, order, min_size, budget, max_stored_nodes):
    """All maximal cliques of the graph given by packed adjacency rows.

    adj is (n, n_words) uint64, order the outer vertex ordering. Returns
    (status, nodes, offsets): status 1 means the budget was exceeded, status
    2 that total stored clique nodes passed max_stored_nodes; otherwise
    clique i occupies nodes[offsets[i]:offsets[i+1]]. Cliques of any size
    count toward the budget; only those with >= min_size nodes are returned.
    """
    n, n_words = adj.shape
    max_depth = n + 2

    p_stack = np.zeros((max_depth, n_words), np.uint64)
    x_stack = np.zeros((max_depth, n_words), np.uint64)
    cand_stack = np.zeros((max_depth, n_words), np.uint64)
    r_nodes = np.empty(max_depth, np.int64)
    seen = np.zeros(n_words, np.uint64)

    out = np.empty(4096, np.int64)
    pos = 0
    offsets = np.empty(256, np.int64)
    offsets[0] = 0
    n_stored = 0
    n_found = 0

    for oi in range(n):
        v = order[oi]
        for w in range(n_words):
            a = adj[v, w]
            p_stack[0, w] = a & ~seen[w]
            x_stack[0, w] = a & seen[w]
        r_nodes[0] = v
        depth = 0
        entering = True

        while depth >= 0:
            if entering:
                entering = False
                pop = False
                pivot = -1

                n_p = 0
                for w in range(n_words):
                    n_p += _popcnt(p_stack[depth, w])

                if n_p == 0:
                    x_empty = True
                    for w in range(n_words):
                        if x_stack[depth, w] != _U0:
                            x_empty = False
                            break
                    if x_empty:
                        # R itself is maximal.
                        n_found += 1
                        if n_found > budget:
                            return 1, out[:pos], offsets[: n_stored + 1]
                        size = depth + 1
                        if size >= min_size:
                            if pos + size > max_stored_nodes:
                                return 2, out[:pos], offsets[: n_stored + 1]
                            while pos + size > out.shape[0]:
                                grown = np.empty(out.shape[0] * 2, np.int64)
                                grown[:pos] = out[:pos]
                                out = grown
                            if n_stored + 2 > offsets.shape[0]:
                                grown = np.empty(offsets.shape[0] * 2, np.int64)
                                grown[: n_stored + 1] = offsets[: n_stored + 1]
                                offsets = grown
                            for i in range(size):
                                out[pos + i] = r_nodes[i]
                            pos += size
                            n_stored += 1
                            offsets[n_stored] = pos
                    pop = True
                else:
                    # Scan X: an excluded vertex adjacent to all of P kills
                    # the subtree; otherwise it may still supply the pivot.
                    best = -1
                    for w in range(n_words):
                        word = x_stack[depth, w]
                        while word != _U0:
                            bit = word & (~word + _U1)
                            word ^= bit
                            u = (w << 6) + _popcnt(bit - _U1)
                            cover = 0
                            for k in range(n_words):
                                cover += _popcnt(p_stack[depth, k] & adj[u, k])
                            if cover == n_p:
                                pop = True
                                break
                            if cover > best:
                                best = cover
                                pivot = u
                        if pop:
                            break

                    if not pop:
                        # Scan P for the pivot, detecting along the way
                        # whether P is a clique: then R union P is the one
                        # maximal clique of this subtree.
                        p_internal = 0
                        for w in range(n_words):
                            word = p_stack[depth, w]
                            while word != _U0:
                                bit = word & (~word + _U1)
                                word ^= bit
                                u = (w << 6) + _popcnt(bit - _U1)
                                cover = 0
                                for k in range(n_words):
                                    cover += _popcnt(p_stack[depth, k] & adj[u, k])
                                p_internal += cover
                                if cover > best:
                                    best = cover
                                    pivot = u
                        if p_internal == n_p * (n_p - 1):
                            n_found += 1
                            if n_found > budget:
                                return 1, out[:pos], offsets[: n_stored + 1]
                            size = depth + 1 + n_p
                            if size >= min_size:
                                if pos + size > max_stored_nodes:
                                    return 2, out[:pos], offsets[: n_stored + 1]
                                while pos + size > out.shape[0]:
                                    grown = np.empty(out.shape[0] * 2, np.int64)
                                    grown[:pos] = out[:pos]
                                    out = grown
                                if n_stored + 2 > offsets.shape[0]:
                                    grown = np.empty(offsets.shape[0] * 2, np.int64)
                                    grown[: n_stored + 1] = offsets[: n_stored + 1]
                                    offsets = grown
                                for i in range(depth + 1):
                                    out[pos + i] = r_nodes[i]
                                j = pos + depth + 1
                                for w in range(n_words):
                                    word = p_stack[depth, w]
                                    while word != _U0:
                                        bit = word & (~word + _U1)
                                        word ^= bit
                                        out[j] = (w << 6) + _popcnt(bit - _U1)
                                        j += 1
                                pos += size
                                n_stored += 1
                                offsets[n_stored] = pos
                            pop = True

                if pop:
                    depth -= 1
                    continue
                for w in range(n_words):
                    cand_stack[depth, w] = p_stack[depth, w] & ~adj[pivot, w]
            else:
                # A child just returned: move its branch node from P to X.
                cv = r_nodes[depth + 1]
                cw = cv >> 6
                cb = _U1 << (np.uint64(cv) & _W63)
                p_stack[depth, cw] &= ~cb
                x_stack[depth, cw] |= cb

            # Branch on the next candidate, if any.
            u = -1
            for w in range(n_words):
                word = cand_stack[depth, w]
                if word != _U0:
                    bit = word & (~word + _U1)
                    cand_stack[depth, w] = word ^ bit
                    u = (w << 6) + _popcnt(bit - _U1)
                    break
            if u < 0:
                depth -= 1
                continue
            r_nodes[depth + 1] = u
            for w in range(n_words):
                p_stack[depth + 1, w] = p_stack[depth, w] & adj[u, w]
                x_stack[depth + 1, w] = x_stack[depth, w] & adj[u, w]
            depth += 1
            entering = True

        vw = v >> 6
        seen[vw] |= _U1 << (np.uint64(v) & _W63)

    return 0, out[:pos], offsets[: n_stored + 1]
