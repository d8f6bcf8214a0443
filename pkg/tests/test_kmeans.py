"""k-means backend tests."""

import math
from itertools import combinations

import numpy as np
import pytest

from partial_reinit.engine import Budget, Level, PerturbationSpec, ReinitSchedule, run_hierarchy
from partial_reinit.errors import ConfigurationError, DomainError
from partial_reinit.oracles import kmeans_bruteforce
from partial_reinit.problems.kmeans import (
    KMeansProblem,
    KMeansState,
    PointSet,
    forgy_init,
    lloyd_step,
    nearest_assignment,
    wcss,
)


class TestWcss:
    def test_hand_sum(self):
        data = PointSet(np.array([[0.0, 0.0], [0.0, 2.0]]))
        state = KMeansState(np.array([[0.0, 1.0]]), np.array([0, 0]))
        assert wcss(state, data) == pytest.approx(2.0)

    def test_center_on_every_point_is_zero(self):
        rng = np.random.default_rng(0)
        data = PointSet(rng.normal(0, 3, (6, 2)))
        state = KMeansState(data.points.copy(), np.arange(6))
        assert wcss(state, data) == 0.0

    def test_four_point_global_value(self, four_point_line):
        centers = np.array([[0.5], [10.5]])
        state = KMeansState(centers, nearest_assignment(centers, four_point_line))
        assert wcss(state, four_point_line) == pytest.approx(1.0)

    def test_dimension_mismatch(self, four_point_line):
        state = KMeansState(np.array([[0.0, 0.0]]), np.zeros(4, dtype=int))
        with pytest.raises(ConfigurationError):
            wcss(state, four_point_line)


class TestForgyInit:
    def test_k_equals_n_is_permutation(self):
        rng = np.random.default_rng(1)
        data = PointSet(rng.normal(0, 3, (5, 2)))
        state = forgy_init(data, 5, rng)
        assert wcss(state, data) == 0.0
        sorted_centers = state.centers[np.lexsort(state.centers.T)]
        sorted_points = data.points[np.lexsort(data.points.T)]
        assert np.array_equal(sorted_centers, sorted_points)

    def test_k_one_center_is_a_data_point(self):
        rng = np.random.default_rng(2)
        data = PointSet(rng.normal(0, 3, (7, 2)))
        state = forgy_init(data, 1, rng)
        assert any(np.array_equal(state.centers[0], p) for p in data.points)

    def test_rejects_k_above_n(self, four_point_line):
        with pytest.raises(DomainError):
            forgy_init(four_point_line, 5, np.random.default_rng(0))

    def test_selection_frequency(self):
        rng = np.random.default_rng(3)
        data = PointSet(rng.normal(0, 10, (100, 2)))
        trials = 10_000
        counts = np.zeros(100)
        for _ in range(trials):
            state = forgy_init(data, 5, rng)
            for c in state.centers:
                counts[np.flatnonzero((data.points == c).all(axis=1))[0]] += 1
        dev = np.abs(counts / trials - 0.05)
        sigma = math.sqrt(0.05 * 0.95 / trials)
        # 100 simultaneous comparisons: a few 3-sigma excursions are expected
        # by chance, 4 sigma is not.
        assert dev.max() < 4.0 * sigma
        assert (dev > 3.0 * sigma).sum() <= 3


class TestLloydStep:
    def test_fixed_point_unchanged(self, four_point_line):
        rng = np.random.default_rng(0)
        centers = np.array([[0.5], [10.5]])
        state = KMeansState(centers, nearest_assignment(centers, four_point_line))
        stepped = lloyd_step(state, four_point_line, rng)
        assert np.array_equal(stepped.centers, state.centers)
        assert np.array_equal(stepped.assignment, state.assignment)

    def test_hand_computed_update(self, four_point_line):
        rng = np.random.default_rng(0)
        centers = np.array([[0.0], [11.0]])
        state = KMeansState(centers, nearest_assignment(centers, four_point_line))
        stepped = lloyd_step(state, four_point_line, rng)
        assert np.array_equal(stepped.centers, np.array([[0.5], [10.5]]))

    def test_never_increases_wcss(self):
        rng = np.random.default_rng(4)
        data = PointSet(rng.normal(0, 5, (50, 2)))
        for _ in range(1000):
            state = forgy_init(data, int(rng.integers(2, 8)), rng)
            before = wcss(state, data)
            after = wcss(lloyd_step(state, data, rng), data)
            assert after <= before + 1e-9


class TestLocalOptimise:
    def test_starting_at_optimum_returns_immediately(self, four_point_line):
        problem = KMeansProblem(four_point_line, 2)
        centers = np.array([[0.5], [10.5]])
        state = KMeansState(centers, nearest_assignment(centers, four_point_line))
        res = problem.local_optimise(state, np.random.default_rng(0))
        assert res.converged
        assert res.evals == 1
        assert res.cost == pytest.approx(1.0)
        assert np.array_equal(res.state.centers, centers)

    def test_all_forgy_starts_reach_global(self, four_point_line):
        """Exhaustive check of all 6 Forgy starts: every one converges to the
        enumerated global optimum (1.0) within 3 assignment passes."""
        problem = KMeansProblem(four_point_line, 2)
        target = kmeans_bruteforce(four_point_line, 2).optimum_cost
        rng = np.random.default_rng(0)
        for pair in combinations(range(4), 2):
            centers = np.ascontiguousarray(four_point_line.points[list(pair)])
            state = KMeansState(centers, nearest_assignment(centers, four_point_line))
            res = problem.local_optimise(state, rng)
            assert res.converged
            assert res.evals <= 3
            assert res.cost == pytest.approx(target, rel=1e-12)

    def test_idempotent_at_fixed_point(self):
        rng = np.random.default_rng(5)
        data = PointSet(rng.normal(0, 5, (40, 2)))
        problem = KMeansProblem(data, 4)
        res = problem.local_optimise(problem.full_init(rng), rng)
        again = problem.local_optimise(res.state, rng)
        assert np.array_equal(again.state.centers, res.state.centers)
        assert np.array_equal(again.state.assignment, res.state.assignment)
        assert again.evals == 1

    def test_terminates_well_before_cap_on_gaussian_data(self):
        rng = np.random.default_rng(6)
        from partial_reinit.datasets import gaussian_cluster_points

        data = gaussian_cluster_points(300, 10, sigma=2.0, rng=rng)
        problem = KMeansProblem(data, 10)
        for seed in range(50):
            r = np.random.default_rng(seed)
            res = problem.local_optimise(problem.full_init(r), r)
            assert res.converged
            assert res.evals < 200


class TestReinitGroups:
    def test_empty_subset_is_identity(self, four_point_line):
        problem = KMeansProblem(four_point_line, 2)
        rng = np.random.default_rng(0)
        state = problem.full_init(rng)
        new = problem.reinit_groups(state, np.array([], dtype=int), PerturbationSpec(), rng)
        assert np.array_equal(new.centers, state.centers)

    def test_full_subset_matches_forgy_distribution(self):
        """Resampling all centers must select each data point with the same
        marginal frequency as a fresh Forgy draw (they share the rule)."""
        rng = np.random.default_rng(7)
        data = PointSet(np.arange(10, dtype=float)[:, None])
        problem = KMeansProblem(data, 2)
        state = problem.full_init(rng)
        counts = np.zeros(10)
        trials = 20_000
        for _ in range(trials):
            new = problem.reinit_groups(state, np.array([0, 1]), PerturbationSpec(), rng)
            for c in new.centers:
                counts[int(c[0])] += 1
        dev = np.abs(counts / (2 * trials) - 0.1)
        sigma = math.sqrt(0.1 * 0.9 / (2 * trials))
        assert dev.max() < 4.0 * sigma
        assert (dev > 3.0 * sigma).sum() <= 2

    def test_single_reinit_center_is_a_data_point(self, four_point_line):
        problem = KMeansProblem(four_point_line, 2)
        rng = np.random.default_rng(8)
        state = problem.full_init(rng)
        new = problem.reinit_groups(state, np.array([1]), PerturbationSpec(), rng)
        assert np.array_equal(new.centers[0], state.centers[0])
        assert any(np.array_equal(new.centers[1], p) for p in four_point_line.points)

    def test_alpha_blend_mode(self, four_point_line):
        problem = KMeansProblem(four_point_line, 2)
        rng = np.random.default_rng(9)
        state = problem.full_init(rng)
        spec = PerturbationSpec(alpha=1.0, mu=0.0, sigma=1.0)
        new = problem.reinit_groups(state, np.array([0]), spec, rng)
        # alpha=1 blend keeps the old center value exactly
        assert np.array_equal(new.centers[0], state.centers[0])


class TestSmallInstanceOracle:
    @pytest.mark.parametrize("n,k,seed", [(7, 2, 0), (8, 3, 1), (6, 3, 2)])
    def test_hierarchy_matches_bruteforce(self, n, k, seed):
        rng = np.random.default_rng(seed)
        data = PointSet(rng.normal(0, 3, (n, 2)))
        target = kmeans_bruteforce(data, k).optimum_cost
        problem = KMeansProblem(data, k)
        schedule = ReinitSchedule([Level(1, 15), Level(k, None)])
        trace = run_hierarchy(problem, schedule, Budget(max_cost_evaluations=2000), seed=seed)
        assert trace.records[-1].best_cost == pytest.approx(target, rel=1e-12)

    def test_k_one_closed_form(self):
        rng = np.random.default_rng(3)
        data = PointSet(rng.normal(0, 2, (6, 2)))
        res = kmeans_bruteforce(data, 1)
        expected = ((data.points - data.points.mean(axis=0)) ** 2).sum()
        assert res.optimum_cost == pytest.approx(expected, rel=1e-12)
