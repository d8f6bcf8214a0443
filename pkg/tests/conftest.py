"""Shared fixtures and toy problems for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from partial_reinit.problems.base import LocalOptResult, ProblemBackend
from partial_reinit.problems.kmeans import PointSet


class QuadraticToyProblem(ProblemBackend):
    """One continuous group with cost (x - target)^2; the local optimiser
    jumps straight to the analytic minimiser, so any schedule must end there."""

    def __init__(self, target: float = 3.0):
        self.target = target

    @property
    def group_count(self) -> int:
        return 1

    def cost(self, state) -> float:
        return float((state[0] - self.target) ** 2)

    def full_init(self, rng):
        return np.array([rng.normal(0.0, 10.0)])

    def local_optimise(self, state, rng, max_evals=None) -> LocalOptResult:
        out = np.array([self.target])
        return LocalOptResult(out, 0.0, 1, True)

    def reinit_groups(self, state, indices, perturbation, rng):
        out = state.copy()
        if len(indices):
            out[0] = rng.normal(0.0, 10.0)
        return out

    def copy_state(self, state):
        return state.copy()


class SpyProblem(ProblemBackend):
    """Wraps a backend and logs (op, detail) events for structural checks."""

    def __init__(self, inner: ProblemBackend):
        self.inner = inner
        self.events: list[tuple[str, int]] = []

    @property
    def group_count(self) -> int:
        return self.inner.group_count

    def cost(self, state) -> float:
        self.events.append(("cost", 0))
        return self.inner.cost(state)

    def full_init(self, rng):
        self.events.append(("init", 0))
        return self.inner.full_init(rng)

    def local_optimise(self, state, rng, max_evals=None):
        self.events.append(("opt", 0))
        return self.inner.local_optimise(state, rng, max_evals)

    def reinit_groups(self, state, indices, perturbation, rng):
        self.events.append(("reinit", len(indices)))
        return self.inner.reinit_groups(state, indices, perturbation, rng)

    def copy_state(self, state):
        return self.inner.copy_state(state)


@pytest.fixture
def four_point_line() -> PointSet:
    """The tiny two-cluster instance whose enumerated optimum is WCSS 1.0."""
    return PointSet(np.array([[0.0], [1.0], [10.0], [11.0]]))


@pytest.fixture
def six_point_line_dissimilarity():
    """Squared distances of {0,1,2,10,11,12}; enumerated optimum cost 4.0."""
    from partial_reinit.problems.kmedoids import DissimilarityMatrix

    pts = np.array([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    return DissimilarityMatrix((pts[:, None] - pts[None, :]) ** 2)
