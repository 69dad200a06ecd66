"""Random connected schedule generator: tree shapes and uniformity."""

from itertools import combinations

from scipy import stats

from gossipsim.core import derive_rng, validate_snapshot
from gossipsim.random_schedules import build_random_interval_connected, random_spanning_tree


def spanning_trees_of_k4():
    """All 16 labeled spanning trees of K4 (Cayley: 4^2)."""
    all_edges = list(combinations(range(4), 2))
    trees = []
    for edges in combinations(all_edges, 3):
        parent = list(range(4))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for u, v in edges:
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            parent[ru] = rv
        if ok:
            trees.append(frozenset(edges))
    return trees


class TestSpanningTree:
    def test_cayley_count(self):
        assert len(spanning_trees_of_k4()) == 16

    def test_tree_shape(self):
        rng = derive_rng("tree-shape")
        for n in (2, 3, 5, 9):
            for _ in range(20):
                edges = random_spanning_tree(n, rng)
                assert len(edges) == n - 1

    def test_uniform_over_labeled_trees(self):
        trees = spanning_trees_of_k4()
        index = {t: i for i, t in enumerate(trees)}
        counts = [0] * 16
        rng = derive_rng("tree-uniformity")
        draws = 16000
        for _ in range(draws):
            counts[index[frozenset(random_spanning_tree(4, rng))]] += 1
        result = stats.chisquare(counts)
        assert result.pvalue > 0.001


class TestSchedule:
    def test_prob_zero_gives_trees(self):
        schedule = build_random_interval_connected(8, 0.0, seed=1, horizon=20)
        for snap in schedule.snapshots:
            assert len(snap.edges) == 7
            assert validate_snapshot(snap).ok

    def test_prob_one_gives_complete_graphs(self):
        schedule = build_random_interval_connected(6, 1.0, seed=1, horizon=5)
        for snap in schedule.snapshots:
            assert len(snap.edges) == 15

    def test_all_rounds_connected(self):
        schedule = build_random_interval_connected(10, 0.2, seed=2, horizon=40)
        for snap in schedule.snapshots:
            assert validate_snapshot(snap).ok

    def test_deterministic(self):
        a = build_random_interval_connected(9, 0.3, seed=5, horizon=10)
        b = build_random_interval_connected(9, 0.3, seed=5, horizon=10)
        assert [s.edges for s in a.snapshots] == [s.edges for s in b.snapshots]
