"""Lloyd's k-means as a reinitialisable problem backend.

The objective is the within-cluster sum of squared Euclidean distances
(WCSS). A variable group is one cluster center; partial reinitialisation
resamples a center to a uniformly random data point, the same rule used for
the initial placement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import PerturbationSpec, perturb_value
from ..errors import ConfigurationError, DomainError
from ..kernels import STATUS_CONVERGED, STATUS_INTERRUPTED, lloyd_run
from .base import LocalOptResult, ProblemBackend

DEFAULT_MAX_ITER = 10_000
_MAX_REPAIR_ROUNDS = 100


@dataclass(frozen=True)
class PointSet:
    """Immutable n x d coordinate matrix."""

    points: np.ndarray

    def __init__(self, points):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.size == 0:
            raise ConfigurationError("points must be a non-empty 2-d array")
        if not np.isfinite(pts).all():
            raise ConfigurationError("points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass
class KMeansState:
    """Cluster centers plus the per-point assignment they induce."""

    centers: np.ndarray
    assignment: np.ndarray

    def copy(self) -> "KMeansState":
        return KMeansState(self.centers.copy(), self.assignment.copy())


def nearest_assignment(centers: np.ndarray, data: PointSet) -> np.ndarray:
    """Index of the closest center per point; ties go to the lowest index."""
    d2 = ((data.points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def wcss(state: KMeansState, data: PointSet) -> float:
    """Sum of squared distances from each point to its assigned center."""
    if state.centers.shape[1] != data.dim or len(state.assignment) != data.n:
        raise ConfigurationError("state dimensions do not match the data")
    diff = data.points - state.centers[state.assignment]
    return float((diff * diff).sum())


def forgy_init(data: PointSet, k: int, rng: np.random.Generator) -> KMeansState:
    """Centers drawn as k distinct data points, uniformly."""
    if not 1 <= k <= data.n:
        raise DomainError(f"need 1 <= k <= {data.n}, got k={k}")
    idx = rng.choice(data.n, size=k, replace=False)
    centers = np.ascontiguousarray(data.points[idx])
    return KMeansState(centers, nearest_assignment(centers, data))


def _repair_empty(centers, assignment, data: PointSet, rng) -> None:
    """Reset centers of empty clusters to uniformly random data points."""
    counts = np.bincount(assignment, minlength=len(centers))
    for c in np.flatnonzero(counts == 0):
        centers[c] = data.points[int(rng.integers(data.n))]


def lloyd_step(state: KMeansState, data: PointSet, rng: np.random.Generator) -> KMeansState:
    """One assign-then-update iteration.

    The assignment phase repairs empty clusters (random data point, then
    reassign) so every cluster owns at least one point before centroids are
    taken; WCSS never increases.
    """
    out = state.copy()
    for _ in range(_MAX_REPAIR_ROUNDS):
        out.assignment = nearest_assignment(out.centers, data)
        counts = np.bincount(out.assignment, minlength=len(out.centers))
        if (counts > 0).all():
            break
        _repair_empty(out.centers, out.assignment, data, rng)
    sums = np.zeros_like(out.centers)
    np.add.at(sums, out.assignment, data.points)
    nonzero = counts > 0
    out.centers[nonzero] = sums[nonzero] / counts[nonzero, None]
    return out


class KMeansProblem(ProblemBackend):
    """WCSS minimisation over k centers on a fixed point set."""

    def __init__(self, data: PointSet, k: int, max_iter: int = DEFAULT_MAX_ITER):
        if not 1 <= k <= data.n:
            raise ConfigurationError(f"need 1 <= k <= {data.n}, got k={k}")
        self.data = data
        self.k = k
        self.max_iter = max_iter

    @property
    def group_count(self) -> int:
        return self.k

    def cost(self, state: KMeansState) -> float:
        return wcss(state, self.data)

    def full_init(self, rng) -> KMeansState:
        return forgy_init(self.data, self.k, rng)

    def local_optimise(self, state, rng, max_evals=None) -> LocalOptResult:
        st = state.copy()
        cap = self.max_iter if max_evals is None else min(self.max_iter, max_evals)
        evals = 0
        repairs = 0
        while True:
            iters, status, cost = lloyd_run(
                self.data.points, st.centers, st.assignment, cap - evals
            )
            evals += iters
            if status != STATUS_INTERRUPTED:
                converged = status == STATUS_CONVERGED
                break
            if evals >= cap or repairs >= _MAX_REPAIR_ROUNDS:
                # Ran out mid-repair: report the state as it stands.
                cost = wcss(st, self.data)
                converged = False
                break
            repairs += 1
            _repair_empty(st.centers, st.assignment, self.data, rng)
        return LocalOptResult(st, float(cost), evals, converged)

    def reinit_groups(self, state, indices, perturbation: PerturbationSpec, rng):
        """Resample the named centers; with alpha > 0 blend via noise instead."""
        out = state.copy()
        for c in indices:
            if perturbation.alpha > 0.0:
                out.centers[c] = perturb_value(out.centers[c], perturbation, rng)
            else:
                out.centers[c] = self.data.points[int(rng.integers(self.data.n))]
        out.assignment = nearest_assignment(out.centers, self.data)
        return out

    def copy_state(self, state: KMeansState) -> KMeansState:
        return state.copy()
