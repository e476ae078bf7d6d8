"""Maximal clique enumeration and the clique filtering stages."""

import numpy as np
import pytest
from conftest import brute_force_cliques, random_graph

import macreg.cliques as cliques_mod
from macreg.cliques import (
    Clique,
    CliqueFilterParams,
    _degeneracy_order,
    _enumerate_python,
    clique_weight,
    enumerate_maximal_cliques,
    maximum_clique,
    node_guided_select,
    normal_consistency_filter,
    rank_top_k,
)
from macreg.correspondences import Correspondences
from macreg.errors import BudgetExceeded, MissingNormals, NoClique
from macreg.geometry import random_rigid_transform
from macreg.graph import CompatGraph, GraphOrder

HAS_KERNEL = cliques_mod._bk_enumerate_packed is not None


class TestEnumeration:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for trial in range(60):
            n = int(rng.integers(2, 17))
            p = float(rng.choice([0.2, 0.5, 0.8]))
            g = random_graph(rng, n, p)
            min_size = int(rng.integers(1, 4))
            expected = brute_force_cliques(g.weights > 0, min_size)
            got = [c.nodes for c in enumerate_maximal_cliques(g, min_size=min_size)]
            assert got == expected, f"trial {trial}"

    def test_backends_agree(self):
        if not HAS_KERNEL:
            pytest.skip("compiled kernel unavailable")
        rng = np.random.default_rng(1)
        for _ in range(30):
            g = random_graph(rng, int(rng.integers(2, 40)), 0.4)
            order = _degeneracy_order(g.weights)
            py = sorted(
                tuple(sorted(t)) for t in _enumerate_python(g.weights, order, 1, 10**6)
            )
            compiled = sorted(
                cliques_mod._enumerate_compiled(g.weights, order, 1, 10**6)
            )
            assert compiled == py

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(2)
        g = random_graph(rng, 14, 0.5)
        perm = rng.permutation(14)
        permuted = CompatGraph(
            g.weights[np.ix_(perm, perm)], GraphOrder.FIRST_ORDER
        )
        base = {c.nodes for c in enumerate_maximal_cliques(g, min_size=1)}
        relabeled = {
            tuple(sorted(int(perm[v]) for v in c.nodes))
            for c in enumerate_maximal_cliques(permuted, min_size=1)
        }
        assert base == relabeled

    def test_min_size_filters_but_budget_counts_all(self):
        # Path graph 0-1-2: maximal cliques are the two edges.
        w = np.array([[0, 1.0, 0], [1.0, 0, 1.0], [0, 1.0, 0]])
        g = CompatGraph(w, GraphOrder.FIRST_ORDER)
        assert [c.nodes for c in enumerate_maximal_cliques(g, min_size=2)] == [
            (0, 1),
            (1, 2),
        ]
        assert enumerate_maximal_cliques(g, min_size=3) == []
        with pytest.raises(BudgetExceeded):
            enumerate_maximal_cliques(g, min_size=3, budget=1)

    def test_budget_exceeded_both_backends(self):
        rng = np.random.default_rng(3)
        g = random_graph(rng, 30, 0.6)
        total = len(enumerate_maximal_cliques(g, min_size=1))
        assert total > 1
        with pytest.raises(BudgetExceeded):
            enumerate_maximal_cliques(g, min_size=1, budget=total - 1)
        order = _degeneracy_order(g.weights)
        with pytest.raises(BudgetExceeded):
            _enumerate_python(g.weights, order, 1, total - 1)

    def test_storage_cap(self, monkeypatch):
        if not HAS_KERNEL:
            pytest.skip("compiled kernel unavailable")
        rng = np.random.default_rng(4)
        g = random_graph(rng, 30, 0.6)
        monkeypatch.setattr(cliques_mod, "_MAX_STORED_NODES", 8)
        with pytest.raises(BudgetExceeded, match="storage"):
            enumerate_maximal_cliques(g, min_size=1)

    def test_empty_and_edgeless_graphs(self):
        empty = CompatGraph(np.zeros((0, 0)), GraphOrder.FIRST_ORDER)
        assert enumerate_maximal_cliques(empty) == []
        lone = CompatGraph(np.zeros((3, 3)), GraphOrder.FIRST_ORDER)
        assert enumerate_maximal_cliques(lone, min_size=1) == [
            Clique((0,), 0.0),
            Clique((1,), 0.0),
            Clique((2,), 0.0),
        ]

    def test_clique_weight(self):
        w = np.zeros((4, 4))
        w[0, 1] = w[1, 0] = 0.5
        w[0, 2] = w[2, 0] = 0.25
        w[1, 2] = w[2, 1] = 1.0
        g = CompatGraph(w, GraphOrder.FIRST_ORDER)
        assert clique_weight(g, (0, 1, 2)) == pytest.approx(1.75)
        found = enumerate_maximal_cliques(g, min_size=3)
        assert found == [Clique((0, 1, 2), 1.75)]

    def test_degeneracy_order_is_permutation(self):
        rng = np.random.default_rng(5)
        g = random_graph(rng, 25, 0.3)
        order = _degeneracy_order(g.weights)
        assert sorted(order.tolist()) == list(range(25))


class TestNodeGuidedSelect:
    def test_keeps_heaviest_clique_per_node(self):
        a = Clique((0, 1, 2), 5.0)
        b = Clique((2, 3, 4), 9.0)
        c = Clique((5, 6, 7), 1.0)
        out = node_guided_select([a, b, c], 8)
        # node 2's best is b, so a survives only through nodes 0 and 1
        assert out == [a, b, c]
        # a clique loses every node to a heavier superset and disappears
        out = node_guided_select([a, Clique((0, 1, 2, 3), 6.0)], 8)
        assert out == [Clique((0, 1, 2, 3), 6.0)]

    def test_weight_tie_prefers_smaller_node_list(self):
        x = Clique((0, 1), 4.0)
        y = Clique((0, 2), 4.0)
        heavy1 = Clique((1, 3), 9.0)
        heavy2 = Clique((2, 4), 9.0)
        # node 0 ties between x and y; the smaller node list (x) wins, and
        # nodes 1 and 2 prefer the heavy cliques, so y vanishes entirely
        assert node_guided_select([y, x, heavy1, heavy2], 5) == [x, heavy1, heavy2]

    def test_result_bounded_by_node_count(self):
        rng = np.random.default_rng(6)
        g = random_graph(rng, 20, 0.6)
        found = enumerate_maximal_cliques(g, min_size=1)
        out = node_guided_select(found, g.n)
        assert len(out) <= g.n
        assert len({c.nodes for c in out}) == len(out)
        assert out == sorted(out, key=lambda c: c.nodes)


class TestNormalConsistency:
    @staticmethod
    def _corrs_with_normals(rng, n, rotate=True):
        src = rng.uniform(0, 1, (n, 3))
        v = rng.normal(size=(n, 3))
        sn = v / np.linalg.norm(v, axis=1, keepdims=True)
        t = random_rigid_transform(rng)
        tn = sn @ t.rotation.T if rotate else sn
        return Correspondences(src, t.apply(src), sn, tn)

    def test_rigidly_rotated_normals_pass(self):
        rng = np.random.default_rng(7)
        corrs = self._corrs_with_normals(rng, 10)
        clique = Clique(tuple(range(10)), 1.0)
        assert normal_consistency_filter(clique, corrs, t_alpha=0.1)

    def test_scrambled_normals_fail(self):
        rng = np.random.default_rng(8)
        src = rng.uniform(0, 1, (10, 3))
        v = rng.normal(size=(10, 3))
        sn = v / np.linalg.norm(v, axis=1, keepdims=True)
        v2 = rng.normal(size=(10, 3))
        tn = v2 / np.linalg.norm(v2, axis=1, keepdims=True)
        corrs = Correspondences(src, src, sn, tn)
        clique = Clique(tuple(range(10)), 1.0)
        assert not normal_consistency_filter(clique, corrs, t_alpha=0.1)

    def test_insensitive_to_sign_flips(self):
        rng = np.random.default_rng(9)
        corrs = self._corrs_with_normals(rng, 8)
        flipped = Correspondences(
            corrs.source, corrs.target, corrs.source_normals, -corrs.target_normals
        )
        clique = Clique(tuple(range(8)), 1.0)
        assert normal_consistency_filter(clique, flipped, 0.1)

    def test_requires_normals(self):
        corrs = Correspondences([[0, 0, 0], [1, 0, 0]], [[0, 0, 0], [1, 0, 0]])
        with pytest.raises(MissingNormals):
            normal_consistency_filter(Clique((0, 1), 1.0), corrs, 0.1)


class TestRanking:
    def test_rank_top_k(self):
        cliques = [Clique((0, 1), 1.0), Clique((2, 3), 5.0), Clique((4, 5), 3.0)]
        assert rank_top_k(cliques, 2) == [Clique((2, 3), 5.0), Clique((4, 5), 3.0)]
        assert rank_top_k(cliques, 99) == sorted(
            cliques, key=lambda c: -c.weight
        )
        # weight ties resolved by node order
        tied = [Clique((9,), 2.0), Clique((1,), 2.0)]
        assert rank_top_k(tied, 2) == [Clique((1,), 2.0), Clique((9,), 2.0)]
        with pytest.raises(ValueError):
            rank_top_k(cliques, 0)

    def test_maximum_clique(self):
        w = np.zeros((5, 5))
        for i, j in [(0, 1), (1, 2), (0, 2), (3, 4)]:
            w[i, j] = w[j, i] = 1.0
        g = CompatGraph(w, GraphOrder.FIRST_ORDER)
        assert maximum_clique(g, min_size=2).nodes == (0, 1, 2)
        with pytest.raises(NoClique):
            maximum_clique(g, min_size=4)


class TestFilterParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            CliqueFilterParams(min_size=0)
        with pytest.raises(ValueError):
            CliqueFilterParams(top_k=0)
        with pytest.raises(ValueError):
            CliqueFilterParams(t_alpha=0.0)
