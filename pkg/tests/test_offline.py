from fractions import Fraction

import numpy as np
import pytest

from localmatch.criteria import CriterionKind
from localmatch.errors import TooLarge
from localmatch.measures import moment
from localmatch.offline import SimpleGraph, enumerate_offline, run_offline
from localmatch.rng import RandomSource

PATH3 = SimpleGraph.from_edges(3, [(0, 1), (1, 2)])
PATH4 = SimpleGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
EDGE = SimpleGraph.from_edges(2, [(0, 1)])


class TestSimpleGraph:
    def test_symmetry_and_sorting(self):
        g = SimpleGraph.from_edges(4, [(2, 0), (3, 2)])
        assert g.adjacency[2] == (0, 3)
        assert g.adjacency[0] == (2,)

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            SimpleGraph.from_edges(2, [(0, 0)])

    def test_edge_list_file(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("# comment\n0 1\n1 2\n")
        g = SimpleGraph.from_edge_list_file(str(p))
        assert g.n == 3
        assert list(g.edges()) == [(0, 1), (1, 2)]


class TestEnumerate:
    def test_path3_greedy_degenerate(self):
        dist = enumerate_offline(PATH3, CriterionKind.GREEDY)
        assert dist == {Fraction(2, 3): Fraction(1)}

    def test_path4_greedy(self):
        dist = enumerate_offline(PATH4, CriterionKind.GREEDY)
        assert dist == {Fraction(1): Fraction(3, 4), Fraction(1, 2): Fraction(1, 4)}

    def test_single_edge_all_kinds(self):
        for kind in CriterionKind:
            assert enumerate_offline(EDGE, kind) == {Fraction(1): Fraction(1)}

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = int(rng.integers(4, 9))
            edges = {(int(a), int(b)) for a in range(n) for b in range(a + 1, n)
                     if rng.random() < 0.4}
            g = SimpleGraph.from_edges(n, edges)
            for kind in (CriterionKind.GREEDY, CriterionKind.UNI_MIN, CriterionKind.MAX_MAX):
                dist = enumerate_offline(g, kind)
                assert sum(dist.values()) == 1

    def test_too_large(self):
        g = SimpleGraph.from_edges(13, [(i, i + 1) for i in range(12)])
        with pytest.raises(TooLarge):
            enumerate_offline(g, CriterionKind.GREEDY)

    def test_uni_min_beats_greedy_on_path4(self):
        # picking the endpoint-side neighbor first preserves the other edge
        greedy = enumerate_offline(PATH4, CriterionKind.GREEDY)
        unimin = enumerate_offline(PATH4, CriterionKind.UNI_MIN)
        mean_g = sum(c * p for c, p in greedy.items())
        mean_m = sum(c * p for c, p in unimin.items())
        assert mean_m > mean_g


class TestRunOffline:
    def test_edgeless_graph(self):
        g = SimpleGraph.from_edges(5, [])
        run = run_offline(g, CriterionKind.GREEDY, RandomSource(0))
        assert run.coverage == 0.0
        assert run.isolated == set(range(5))
        assert run.matching == []

    def test_perfect_matching_on_one_regular(self):
        g = SimpleGraph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
        for kind in CriterionKind:
            run = run_offline(g, kind, RandomSource(3))
            assert run.coverage == 1.0

    def test_partition_and_coverage_identity(self):
        rng = np.random.default_rng(12)
        root = RandomSource(12)
        for child in root.spawn(20):
            n = int(rng.integers(3, 10))
            edges = {(int(a), int(b)) for a in range(n) for b in range(a + 1, n)
                     if rng.random() < 0.5}
            g = SimpleGraph.from_edges(n, edges)
            run = run_offline(g, CriterionKind.GREEDY, child)
            matched = {v for pair in run.matching for v in pair}
            assert len(matched) == 2 * len(run.matching)
            assert matched | run.isolated == set(range(n))
            assert run.coverage == 2 * len(run.matching) / n

    def test_matching_is_maximal(self):
        rng = np.random.default_rng(44)
        root = RandomSource(44)
        for child in root.spawn(20):
            n = int(rng.integers(3, 10))
            edges = {(int(a), int(b)) for a in range(n) for b in range(a + 1, n)
                     if rng.random() < 0.5}
            g = SimpleGraph.from_edges(n, edges)
            run = run_offline(g, CriterionKind.UNI_MAX, child)
            unmatched = run.isolated
            for u, v in g.edges():
                assert not (u in unmatched and v in unmatched)

    def test_measure_trajectory_monotone(self):
        # <mu_j, f> non-increasing for nonnegative increasing f
        functionals = [
            lambda m: moment(m, 0),
            lambda m: moment(m, 1),
            lambda m: moment(m, 2),
        ] + [
            (lambda k: lambda m: sum(c for y, c in m.counts.items() if y >= k))(k)
            for k in range(1, 6)
        ]
        rng = np.random.default_rng(9)
        root = RandomSource(9)
        for child in root.spawn(15):
            n = int(rng.integers(4, 11))
            edges = {(int(a), int(b)) for a in range(n) for b in range(a + 1, n)
                     if rng.random() < 0.5}
            g = SimpleGraph.from_edges(n, edges)
            run = run_offline(g, CriterionKind.GREEDY, child)
            for f in functionals:
                vals = [f(m) for m in run.trajectory]
                assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_trajectory_length_is_n_plus_one(self):
        run = run_offline(PATH4, CriterionKind.GREEDY, RandomSource(1))
        assert len(run.trajectory) == 5

    def test_monte_carlo_mean_matches_enumeration(self):
        # oracle cross-check at 4 sigma with 20000 replicates
        for kind in (CriterionKind.GREEDY, CriterionKind.UNI_MIN):
            dist = enumerate_offline(PATH4, kind)
            mean = float(sum(c * p for c, p in dist.items()))
            var = float(sum((float(c) - mean) ** 2 * p for c, p in dist.items()))
            reps = 20_000
            root = RandomSource(77)
            covs = [run_offline(PATH4, kind, child).coverage for child in root.spawn(reps)]
            z = (np.mean(covs) - mean) / (np.sqrt(var / reps) + 1e-15)
            assert abs(z) < 4
