"""The contract every optimisation problem fulfils for the engine."""

from __future__ import annotations

import copy
from abc import ABC, abstractmethod
from typing import Any, NamedTuple

import numpy as np

from ..engine import PerturbationSpec


class LocalOptResult(NamedTuple):
    """Outcome of one local-optimiser call.

    ``evals`` counts inner iterations, each of which evaluates the objective
    once as a byproduct; the engine charges them against the evaluation
    budget. ``converged`` is False when an iteration cap or the remaining
    budget cut the optimiser short.
    """

    state: Any
    cost: float
    evals: int
    converged: bool


class ProblemBackend(ABC):
    """Minimisation problem whose state is split into reinitialisable groups.

    A group is the unit the engine resamples: a cluster center, a medoid
    slot, one hidden state's parameter rows, or a single scalar weight.
    Maximisation problems expose their negated objective so the engine's
    comparisons apply unchanged.
    """

    @property
    @abstractmethod
    def group_count(self) -> int:
        """Number of variable groups; fixed for the instance's lifetime."""

    @abstractmethod
    def cost(self, state) -> float:
        """Objective value of ``state``; lower is better."""

    @abstractmethod
    def full_init(self, rng: np.random.Generator):
        """A fresh random state with every group resampled."""

    @abstractmethod
    def local_optimise(
        self, state, rng: np.random.Generator, max_evals: int | None = None
    ) -> LocalOptResult:
        """Descend from ``state`` to a local optimum of the inner algorithm.

        Must not resample any group. ``max_evals``, when given, caps the
        inner iterations so the caller's budget binds exactly.
        """

    @abstractmethod
    def reinit_groups(
        self,
        state,
        indices: np.ndarray,
        perturbation: PerturbationSpec,
        rng: np.random.Generator,
    ):
        """A copy of ``state`` with exactly the named groups resampled."""

    def copy_state(self, state):
        """Deep snapshot; backends override with cheaper array copies."""
        return copy.deepcopy(state)
