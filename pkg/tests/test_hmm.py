"""HMM backend tests."""

import math

import numpy as np
import pytest

from partial_reinit.engine import PerturbationSpec
from partial_reinit.errors import ConfigurationError
from partial_reinit.oracles import hmm_bruteforce
from partial_reinit.problems.hmm import (
    HmmModel,
    HmmProblem,
    ObsSeq,
    baum_welch_step,
    log_likelihood,
    random_model,
)

ROW_TOL = 1e-12


def _seq(bits):
    return ObsSeq(np.array(bits), 2)


class TestRandomModel:
    def test_single_state_is_forced(self):
        model = random_model(1, 3, np.random.default_rng(0))
        assert model.pi[0] == 1.0
        assert model.A[0, 0] == 1.0
        assert model.B.sum() == pytest.approx(1.0, abs=ROW_TOL)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(1, 9))
            m = int(rng.integers(2, 5))
            model = random_model(n, m, rng)
            model.validate()

    def test_entry_mean_matches_direct_simulation(self):
        """Mean of A[0,0] equals the mean of the same normalise-a-uniform-row
        rule simulated directly."""
        rng = np.random.default_rng(2)
        draws = np.array([random_model(2, 2, rng).A[0, 0] for _ in range(10_000)])
        sim_rng = np.random.default_rng(99)
        rows = sim_rng.random((10_000, 2))
        sim = rows[:, 0] / rows.sum(axis=1)
        se = math.sqrt(draws.var() / draws.size + sim.var() / sim.size)
        assert abs(draws.mean() - sim.mean()) < 3.0 * se


class TestLogLikelihood:
    def test_deterministic_emitter_is_certain(self):
        model = HmmModel(np.array([1.0]), np.array([[1.0]]), np.array([[0.0, 1.0]]))
        assert log_likelihood(model, _seq([1, 1, 1])) == 0.0

    def test_uniform_model_closed_form(self):
        n = 2
        model = HmmModel(np.full(n, 0.5), np.full((n, n), 0.5), np.full((n, 2), 0.5))
        for t in (1, 5, 9):
            seq = _seq([0, 1] * t)
            assert log_likelihood(model, seq) == pytest.approx(
                len(seq) * math.log(0.5), rel=1e-12
            )

    def test_matches_path_enumeration(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            model = random_model(2, 2, rng)
            seq = _seq(rng.integers(2, size=4))
            exact = hmm_bruteforce(model, seq)
            assert log_likelihood(model, seq) == pytest.approx(exact, rel=1e-10)

    def test_zero_probability_returns_neg_inf(self):
        model = HmmModel(np.array([1.0]), np.array([[1.0]]), np.array([[1.0, 0.0]]))
        assert log_likelihood(model, _seq([0, 1])) == -np.inf

    def test_always_nonpositive(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            model = random_model(int(rng.integers(1, 5)), 2, rng)
            seq = _seq(rng.integers(2, size=int(rng.integers(1, 9))))
            assert log_likelihood(model, seq) <= 0.0


class TestBaumWelchStep:
    def test_single_state_learns_empirical_frequencies(self):
        rng = np.random.default_rng(5)
        model = random_model(1, 2, rng)
        seq = _seq([1, 1, 0, 1])
        stepped, _ = baum_welch_step(model, seq)
        assert stepped.B[0] == pytest.approx([0.25, 0.75], abs=ROW_TOL)

    def test_fixed_point_unchanged(self):
        model = HmmModel(np.array([1.0]), np.array([[1.0]]), np.array([[0.25, 0.75]]))
        stepped, ll = baum_welch_step(model, _seq([1, 1, 0, 1]))
        assert stepped.B[0] == pytest.approx(model.B[0], abs=ROW_TOL)
        assert ll == pytest.approx(math.log(0.75**3 * 0.25), rel=1e-12)

    def test_em_ascent(self):
        rng = np.random.default_rng(6)
        for _ in range(1000):
            n = int(rng.integers(1, 5))
            t = int(rng.integers(2, 17))
            model = random_model(n, 2, rng)
            seq = _seq(rng.integers(2, size=t))
            stepped, ll_before = baum_welch_step(model, seq)
            assert log_likelihood(stepped, seq) >= ll_before - 1e-9

    def test_preserves_stochasticity(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            model = random_model(int(rng.integers(2, 5)), 2, rng)
            seq = _seq(rng.integers(2, size=8))
            stepped, _ = baum_welch_step(model, seq)
            stepped.validate()


class TestLocalOptimise:
    def test_deterministic_emitter_converges_immediately(self):
        problem = HmmProblem(_seq([1, 1, 1, 1]), 1)
        model = HmmModel(np.array([1.0]), np.array([[1.0]]), np.array([[0.0, 1.0]]))
        res = problem.local_optimise(model, np.random.default_rng(0))
        assert res.converged
        assert res.cost == 0.0
        assert res.evals <= 2

    def test_overparameterised_model_fits_short_string(self):
        """With as many hidden states as bits, training drives the negative
        log-likelihood near zero on a majority of random starts."""
        rng = np.random.default_rng(8)
        seq = _seq(rng.integers(2, size=8))
        problem = HmmProblem(seq, 8, max_iter=4000)
        near_certain = 0
        for s in range(11):
            r = np.random.default_rng(s)
            res = problem.local_optimise(problem.full_init(r), r)
            if res.cost < 0.2:
                near_certain += 1
        assert near_certain >= 6

    def test_converges_before_cap_at_moderate_scale(self):
        rng = np.random.default_rng(9)
        for s in range(100):
            n = int(rng.integers(2, 33))
            t = int(rng.integers(2, 33))
            seq = _seq(rng.integers(2, size=t))
            problem = HmmProblem(seq, n)
            r = np.random.default_rng(s)
            res = problem.local_optimise(problem.full_init(r), r)
            assert res.converged

    def test_respects_eval_cap(self):
        rng = np.random.default_rng(10)
        seq = _seq(rng.integers(2, size=16))
        problem = HmmProblem(seq, 8)
        res = problem.local_optimise(problem.full_init(rng), rng, max_evals=5)
        assert res.evals <= 5


class TestReinitGroups:
    def test_empty_subset_is_identity(self):
        rng = np.random.default_rng(11)
        problem = HmmProblem(_seq([0, 1, 1, 0]), 4)
        model = problem.full_init(rng)
        new = problem.reinit_groups(model, np.array([], dtype=int), PerturbationSpec(), rng)
        assert np.array_equal(new.A, model.A)
        assert np.array_equal(new.B, model.B)

    def test_locality_outside_subset(self):
        rng = np.random.default_rng(12)
        problem = HmmProblem(_seq([0, 1, 1, 0]), 6)
        model = problem.full_init(rng)
        new = problem.reinit_groups(model, np.array([3]), PerturbationSpec(), rng)
        mask = np.ones(6, dtype=bool)
        mask[3] = False
        assert np.array_equal(new.A[mask], model.A[mask])
        assert np.array_equal(new.B[mask], model.B[mask])
        assert np.array_equal(new.pi, model.pi)
        assert not np.array_equal(new.A[3], model.A[3])
        new.validate()

    def test_full_subset_resamples_like_random_model(self):
        """Resampling every state yields the same A[0,0] distribution as a
        fresh random model (pi is retained)."""
        rng = np.random.default_rng(13)
        problem = HmmProblem(_seq([0, 1]), 2)
        model = problem.full_init(rng)
        reinit_draws = []
        for _ in range(5_000):
            new = problem.reinit_groups(model, np.array([0, 1]), PerturbationSpec(), rng)
            reinit_draws.append(new.A[0, 0])
            assert np.array_equal(new.pi, model.pi)
        fresh_rng = np.random.default_rng(14)
        fresh = [random_model(2, 2, fresh_rng).A[0, 0] for _ in range(5_000)]
        reinit_draws, fresh = np.array(reinit_draws), np.array(fresh)
        se = math.sqrt(reinit_draws.var() / 5_000 + fresh.var() / 5_000)
        assert abs(reinit_draws.mean() - fresh.mean()) < 4.0 * se


class TestScaledVsUnscaled:
    def test_agreement_to_length_twelve(self):
        rng = np.random.default_rng(15)
        for _ in range(30):
            n = int(rng.integers(1, 4))
            t = int(rng.integers(1, 13))
            if n**t > 10**6:
                continue
            model = random_model(n, 2, rng)
            seq = _seq(rng.integers(2, size=t))
            assert log_likelihood(model, seq) == pytest.approx(
                hmm_bruteforce(model, seq), rel=1e-10
            )


class TestObsSeqValidation:
    def test_symbol_out_of_range(self):
        with pytest.raises(ConfigurationError):
            ObsSeq(np.array([0, 2]), 2)

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            ObsSeq(np.array([], dtype=int), 2)
