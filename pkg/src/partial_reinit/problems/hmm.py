"""Discrete hidden Markov model training by Baum-Welch.

The cost handed to the engine is the negative log-likelihood of one fixed
observation sequence, computed with the scaled forward recursion. A variable
group is one hidden state: reinitialising state s resamples rows A[s, :] and
B[s, :] (its outgoing transitions and emissions) while the initial
distribution and all other rows are untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import PerturbationSpec
from ..errors import ConfigurationError, NumericError
from ..kernels import (
    STATUS_CONVERGED,
    STATUS_INTERRUPTED,
    hmm_bw_step,
    hmm_em_run,
    hmm_forward_ll,
)
from .base import LocalOptResult, ProblemBackend

ROW_SUM_TOL = 1e-12
DEFAULT_LL_TOL = 1e-8
DEFAULT_MAX_ITER = 1_000


@dataclass
class HmmModel:
    """Initial distribution pi, transition matrix A and emission matrix B."""

    pi: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.pi = np.ascontiguousarray(self.pi, dtype=np.float64)
        self.A = np.ascontiguousarray(self.A, dtype=np.float64)
        self.B = np.ascontiguousarray(self.B, dtype=np.float64)

    @property
    def n_states(self) -> int:
        return len(self.pi)

    @property
    def n_symbols(self) -> int:
        return self.B.shape[1]

    def copy(self) -> "HmmModel":
        return HmmModel(self.pi.copy(), self.A.copy(), self.B.copy())

    def validate(self) -> None:
        n = self.n_states
        if self.A.shape != (n, n) or self.B.shape[0] != n:
            raise ConfigurationError("model matrices have inconsistent shapes")
        for name, arr in (("pi", self.pi[None, :]), ("A", self.A), ("B", self.B)):
            if (arr < 0.0).any():
                raise ConfigurationError(f"{name} has negative entries")
            if np.abs(arr.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
                raise ConfigurationError(f"{name} rows must sum to 1")


@dataclass(frozen=True)
class ObsSeq:
    """A sequence of symbols in [0, n_symbols)."""

    symbols: np.ndarray
    n_symbols: int

    def __init__(self, symbols, n_symbols: int):
        sym = np.ascontiguousarray(symbols, dtype=np.int64)
        if sym.ndim != 1 or sym.size == 0:
            raise ConfigurationError("observation sequence must be non-empty 1-d")
        if (sym < 0).any() or (sym >= n_symbols).any():
            raise ConfigurationError(f"symbols must lie in [0, {n_symbols})")
        object.__setattr__(self, "symbols", sym)
        object.__setattr__(self, "n_symbols", n_symbols)

    def __len__(self) -> int:
        return len(self.symbols)


def _random_rows(shape, rng) -> np.ndarray:
    rows = rng.random(shape)
    return rows / rows.sum(axis=1, keepdims=True)


def random_model(n_states: int, n_symbols: int, rng: np.random.Generator) -> HmmModel:
    """Rows of iid uniform(0,1) entries, each normalised to sum 1."""
    pi = _random_rows((1, n_states), rng)[0]
    A = _random_rows((n_states, n_states), rng)
    B = _random_rows((n_states, n_symbols), rng)
    return HmmModel(pi, A, B)


def log_likelihood(model: HmmModel, seq: ObsSeq) -> float:
    """ln P(seq | model); -inf for a zero-probability sequence."""
    return float(hmm_forward_ll(model.pi, model.A, model.B, seq.symbols))


def baum_welch_step(model: HmmModel, seq: ObsSeq) -> tuple[HmmModel, float]:
    """One EM update; returns the new model and the old model's
    log-likelihood (computed by the same forward pass the update reuses)."""
    out = model.copy()
    ll, ok = hmm_bw_step(out.pi, out.A, out.B, seq.symbols)
    if not ok:
        raise NumericError("zero-probability sequence during EM update")
    return out, float(ll)


class HmmProblem(ProblemBackend):
    """Negative-log-likelihood minimisation for one observation sequence."""

    def __init__(
        self,
        seq: ObsSeq,
        n_states: int,
        ll_tol: float = DEFAULT_LL_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
    ):
        if n_states < 1:
            raise ConfigurationError("need at least one hidden state")
        self.seq = seq
        self.n_states = n_states
        self.ll_tol = ll_tol
        self.max_iter = max_iter

    @property
    def group_count(self) -> int:
        return self.n_states

    def cost(self, state: HmmModel) -> float:
        return -log_likelihood(state, self.seq)

    def full_init(self, rng) -> HmmModel:
        return random_model(self.n_states, self.seq.n_symbols, rng)

    def local_optimise(self, state, rng, max_evals=None) -> LocalOptResult:
        st = state.copy()
        cap = self.max_iter if max_evals is None else min(self.max_iter, max_evals)
        ll, iters, status = hmm_em_run(
            st.pi, st.A, st.B, self.seq.symbols, self.ll_tol, cap
        )
        if status == STATUS_INTERRUPTED:
            raise NumericError("zero-probability sequence during EM training")
        return LocalOptResult(st, -float(ll), iters, status == STATUS_CONVERGED)

    def reinit_groups(self, state, indices, perturbation: PerturbationSpec, rng):
        """Resample rows A[s, :] and B[s, :] for each named state.

        pi stays untouched; perturbation blending does not apply to the
        row-stochastic parameters, so reinitialisation is always a full
        resample of the named rows.
        """
        out = state.copy()
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size:
            out.A[idx] = _random_rows((idx.size, out.n_states), rng)
            out.B[idx] = _random_rows((idx.size, out.n_symbols), rng)
        return out

    def copy_state(self, state: HmmModel) -> HmmModel:
        return state.copy()
