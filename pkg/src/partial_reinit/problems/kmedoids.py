"""PAM-style k-medoids in the alternating (Voronoi-iteration) form.

Works directly on a precomputed dissimilarity matrix: points are assigned
to their nearest medoid, then each cluster elects the member with the least
summed within-cluster dissimilarity, until neither step changes anything.
A variable group is one medoid slot; partial reinitialisation replaces a
slot with a uniformly random non-medoid point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..engine import PerturbationSpec
from ..errors import ConfigurationError, DomainError
from ..kernels import STATUS_CONVERGED, pam_run
from ..kernels._pykernels import elect_medoids
from .base import LocalOptResult, ProblemBackend

DEFAULT_MAX_ITER = 10_000
_ASYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Immutable n x n matrix of pairwise dissimilarities."""

    d: np.ndarray

    def __init__(self, d, symmetrise: bool = True):
        mat = np.ascontiguousarray(d, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.size == 0:
            raise ConfigurationError("dissimilarity matrix must be square")
        if (np.diag(mat) != 0.0).any():
            raise ConfigurationError("dissimilarity matrix diagonal must be zero")
        if (mat < 0.0).any() or not np.isfinite(mat).all():
            raise ConfigurationError("dissimilarities must be finite and >= 0")
        asym = np.abs(mat - mat.T).max()
        scale = max(np.abs(mat).max(), 1.0)
        if asym > 0.0:
            if asym > _ASYMMETRY_TOL * scale:
                if not symmetrise:
                    raise ConfigurationError(
                        f"matrix asymmetric beyond tolerance (max dev {asym:g})"
                    )
                warnings.warn(
                    f"dissimilarity matrix asymmetric (max dev {asym:g}); "
                    "symmetrising by averaging",
                    stacklevel=2,
                )
            mat = np.ascontiguousarray((mat + mat.T) / 2.0)
        object.__setattr__(self, "d", mat)

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass
class MedoidState:
    """k distinct medoid point indices plus per-point slot assignment."""

    medoids: np.ndarray
    assignment: np.ndarray

    def copy(self) -> "MedoidState":
        return MedoidState(self.medoids.copy(), self.assignment.copy())


def nearest_medoid_assignment(medoids: np.ndarray, d: DissimilarityMatrix) -> np.ndarray:
    """Slot of the nearest medoid per point; ties go to the lowest slot."""
    return d.d[:, medoids].argmin(axis=1)


def medoid_cost(state: MedoidState, d: DissimilarityMatrix) -> float:
    """Total dissimilarity from each point to its assigned medoid."""
    return float(d.d[np.arange(d.n), state.medoids[state.assignment]].sum())


def init_medoids(d: DissimilarityMatrix, k: int, rng: np.random.Generator) -> MedoidState:
    """k distinct uniform point indices as medoids."""
    if not 1 <= k <= d.n:
        raise DomainError(f"need 1 <= k <= {d.n}, got k={k}")
    medoids = np.sort(rng.choice(d.n, size=k, replace=False)).astype(np.int64)
    return MedoidState(medoids, nearest_medoid_assignment(medoids, d))


def pam_step(state: MedoidState, d: DissimilarityMatrix) -> MedoidState:
    """One assign-then-elect iteration; the cost never increases."""
    out = state.copy()
    out.assignment = nearest_medoid_assignment(out.medoids, d)
    elect_medoids(d.d, out.medoids, out.assignment)
    return out


def update_assignment_after_swap(
    state: MedoidState, slot: int, d: DissimilarityMatrix
) -> np.ndarray:
    """Refresh the assignment incrementally after one medoid slot changed.

    Points previously in the swapped slot rescan all medoids; every other
    point only compares its current medoid against the new one, preserving
    the lowest-slot tie rule. Equivalent to a full recompute.
    """
    dd = d.d
    assignment = state.assignment.copy()
    new_med = state.medoids[slot]
    dist_new = dd[:, new_med]
    dist_cur = dd[np.arange(d.n), state.medoids[assignment]]
    better = dist_new < dist_cur
    tie_lower = (dist_new == dist_cur) & (slot < assignment)
    assignment[better | tie_lower] = slot
    stale = np.flatnonzero(state.assignment == slot)
    if stale.size:
        assignment[stale] = dd[np.ix_(stale, state.medoids)].argmin(axis=1)
    return assignment


class KMedoidsProblem(ProblemBackend):
    """Summed-dissimilarity minimisation over k medoid slots."""

    def __init__(self, d: DissimilarityMatrix, k: int, max_iter: int = DEFAULT_MAX_ITER):
        if not 1 <= k <= d.n:
            raise ConfigurationError(f"need 1 <= k <= {d.n}, got k={k}")
        self.d = d
        self.k = k
        self.max_iter = max_iter

    @property
    def group_count(self) -> int:
        return self.k

    def cost(self, state: MedoidState) -> float:
        return medoid_cost(state, self.d)

    def full_init(self, rng) -> MedoidState:
        return init_medoids(self.d, self.k, rng)

    def local_optimise(self, state, rng, max_evals=None) -> LocalOptResult:
        st = state.copy()
        cap = self.max_iter if max_evals is None else min(self.max_iter, max_evals)
        iters, status, cost = pam_run(self.d.d, st.medoids, st.assignment, cap)
        return LocalOptResult(st, float(cost), iters, status == STATUS_CONVERGED)

    def reinit_groups(self, state, indices, perturbation: PerturbationSpec, rng):
        """Replace the named slots with uniform non-medoid points.

        Medoids are discrete point indices, so the continuous perturbation
        blend does not apply here.
        """
        out = state.copy()
        for slot in indices:
            candidates = np.setdiff1d(np.arange(self.d.n), out.medoids)
            if candidates.size == 0:
                continue  # k == n: every point already a medoid
            out.medoids[slot] = candidates[int(rng.integers(candidates.size))]
            out.assignment = update_assignment_after_swap(out, int(slot), self.d)
        return out

    def copy_state(self, state: MedoidState) -> MedoidState:
        return state.copy()
