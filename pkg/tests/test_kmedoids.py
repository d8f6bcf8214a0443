"""k-medoids backend tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partial_reinit.engine import Budget, Level, PerturbationSpec, ReinitSchedule, run_hierarchy
from partial_reinit.errors import ConfigurationError, DomainError
from partial_reinit.oracles import kmedoids_bruteforce
from partial_reinit.problems.kmedoids import (
    DissimilarityMatrix,
    KMedoidsProblem,
    MedoidState,
    init_medoids,
    medoid_cost,
    nearest_medoid_assignment,
    pam_step,
    update_assignment_after_swap,
)


def _squared_line(points):
    pts = np.asarray(points, dtype=float)
    return DissimilarityMatrix((pts[:, None] - pts[None, :]) ** 2)


def _random_dissimilarity(rng, n, dim=2):
    pts = rng.normal(0, 5, (n, dim))
    diff = pts[:, None, :] - pts[None, :, :]
    return DissimilarityMatrix((diff**2).sum(axis=2))


class TestMatrixValidation:
    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(ConfigurationError):
            DissimilarityMatrix(np.array([[1.0, 2.0], [2.0, 0.0]]))

    def test_negative_entries_rejected(self):
        with pytest.raises(ConfigurationError):
            DissimilarityMatrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))

    def test_asymmetry_warns_and_averages(self):
        mat = np.array([[0.0, 2.0], [4.0, 0.0]])
        with pytest.warns(UserWarning, match="symmetrising"):
            d = DissimilarityMatrix(mat)
        assert d.d[0, 1] == d.d[1, 0] == 3.0

    def test_tiny_asymmetry_silently_averaged(self):
        mat = np.array([[0.0, 2.0], [2.0 + 1e-13, 0.0]])
        d = DissimilarityMatrix(mat)
        assert d.d[0, 1] == d.d[1, 0]


class TestMedoidCost:
    def test_every_point_its_own_medoid(self):
        d = _squared_line([0.0, 1.0, 2.0])
        state = MedoidState(np.arange(3, dtype=np.int64), np.arange(3, dtype=np.int64))
        assert medoid_cost(state, d) == 0.0

    def test_hand_case_global_value(self, six_point_line_dissimilarity):
        d = six_point_line_dissimilarity
        medoids = np.array([1, 4], dtype=np.int64)  # the points 1 and 11
        state = MedoidState(medoids, nearest_medoid_assignment(medoids, d))
        assert medoid_cost(state, d) == pytest.approx(4.0)

    def test_single_medoid_two_points(self):
        d = DissimilarityMatrix(np.array([[0.0, 7.0], [7.0, 0.0]]))
        state = MedoidState(np.array([0], dtype=np.int64), np.zeros(2, dtype=np.int64))
        assert medoid_cost(state, d) == pytest.approx(7.0)


class TestLocalOptimise:
    def test_global_optimum_unchanged(self, six_point_line_dissimilarity):
        d = six_point_line_dissimilarity
        problem = KMedoidsProblem(d, 2)
        medoids = np.array([1, 4], dtype=np.int64)
        state = MedoidState(medoids, nearest_medoid_assignment(medoids, d))
        res = problem.local_optimise(state, np.random.default_rng(0))
        assert res.converged
        assert np.array_equal(res.state.medoids, medoids)
        assert res.cost == pytest.approx(4.0)

    def test_converges_from_bad_start(self, six_point_line_dissimilarity):
        """From the endpoints {0, 12} the alternation must land on the
        enumerated optimum {1, 11} at cost 4."""
        d = six_point_line_dissimilarity
        problem = KMedoidsProblem(d, 2)
        medoids = np.array([0, 5], dtype=np.int64)
        state = MedoidState(medoids, nearest_medoid_assignment(medoids, d))
        res = problem.local_optimise(state, np.random.default_rng(0))
        assert res.cost == pytest.approx(4.0)
        assert np.array_equal(res.state.medoids, np.array([1, 4]))

    def test_cost_strictly_decreases_until_fixed_point(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            d = _random_dissimilarity(rng, 25)
            state = init_medoids(d, int(rng.integers(2, 6)), rng)
            prev = medoid_cost(state, d)
            while True:
                state = pam_step(state, d)
                cur = medoid_cost(state, d)
                assert cur <= prev + 1e-9
                if cur == prev:
                    break
                prev = cur

    def test_idempotent_at_fixed_point(self):
        rng = np.random.default_rng(2)
        d = _random_dissimilarity(rng, 30)
        problem = KMedoidsProblem(d, 4)
        res = problem.local_optimise(problem.full_init(rng), rng)
        again = problem.local_optimise(res.state, rng)
        assert np.array_equal(again.state.medoids, res.state.medoids)
        assert again.evals == 1


class TestInitAndReinit:
    def test_k_above_n_rejected(self):
        d = _squared_line([0.0, 1.0])
        with pytest.raises(DomainError):
            init_medoids(d, 3, np.random.default_rng(0))

    def test_k_equals_n_zero_cost(self):
        d = _squared_line([0.0, 1.0, 2.0])
        state = init_medoids(d, 3, np.random.default_rng(0))
        assert medoid_cost(state, d) == 0.0

    def test_empty_reinit_is_identity(self, six_point_line_dissimilarity):
        problem = KMedoidsProblem(six_point_line_dissimilarity, 2)
        rng = np.random.default_rng(3)
        state = problem.full_init(rng)
        new = problem.reinit_groups(state, np.array([], dtype=int), PerturbationSpec(), rng)
        assert np.array_equal(new.medoids, state.medoids)

    def test_reinit_never_duplicates(self):
        rng = np.random.default_rng(4)
        d = _random_dissimilarity(rng, 12)
        problem = KMedoidsProblem(d, 4)
        state = problem.full_init(rng)
        pert = PerturbationSpec()
        for _ in range(2000):
            slot = np.array([int(rng.integers(4))])
            state = problem.reinit_groups(state, slot, pert, rng)
            assert len(set(state.medoids.tolist())) == 4

    def test_reinit_excludes_current_medoids(self):
        rng = np.random.default_rng(5)
        d = _random_dissimilarity(rng, 8)
        problem = KMedoidsProblem(d, 3)
        state = problem.full_init(rng)
        before = set(state.medoids.tolist())
        for _ in range(500):
            new = problem.reinit_groups(state, np.array([1]), PerturbationSpec(), rng)
            assert new.medoids[1] not in before


class TestIncrementalAssignment:
    @given(st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_matches_full_recompute(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(6, 25))
        k = int(rng.integers(2, min(6, n)))
        d = _random_dissimilarity(rng, n)
        state = init_medoids(d, k, rng)
        slot = int(rng.integers(k))
        candidates = np.setdiff1d(np.arange(n), state.medoids)
        state.medoids[slot] = candidates[int(rng.integers(candidates.size))]
        incremental = update_assignment_after_swap(state, slot, d)
        full = nearest_medoid_assignment(state.medoids, d)
        assert np.array_equal(incremental, full)

    def test_matches_on_tied_distances(self):
        # Symmetric layout producing exact distance ties across slots.
        d = _squared_line([0.0, 1.0, 2.0, 3.0, 4.0])
        state = MedoidState(
            np.array([0, 4], dtype=np.int64),
            nearest_medoid_assignment(np.array([0, 4], dtype=np.int64), d),
        )
        state.medoids[1] = 2  # distance ties for points 1 and 3 resolve by slot
        incremental = update_assignment_after_swap(state, 1, d)
        assert np.array_equal(incremental, nearest_medoid_assignment(state.medoids, d))


class TestGlobalRecovery:
    def test_small_instance_reaches_bruteforce_optimum(self):
        rng = np.random.default_rng(6)
        d = _random_dissimilarity(rng, 20)
        target = kmedoids_bruteforce(d, 3).optimum_cost
        problem = KMedoidsProblem(d, 3)
        schedule = ReinitSchedule([Level(1, 50), Level(3, None)])
        trace = run_hierarchy(problem, schedule, Budget(max_cost_evaluations=2000), seed=0)
        assert trace.records[-1].best_cost == pytest.approx(target, rel=1e-12)
