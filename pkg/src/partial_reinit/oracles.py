"""Brute-force ground truth for small instances.

These enumerations are deliberately independent of the optimiser code paths
they are used to check: the k-means oracle enumerates assignments rather
than running Lloyd iterations, the HMM oracle sums over hidden paths rather
than scaling a forward pass, and the RBM oracle enumerates the joint
configuration space rather than marginalising the hidden layer. Size guards
are hard errors; a sampled "oracle" would not be one.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Any, Callable

import numpy as np
from scipy.special import logsumexp

from .errors import SizeGuardError
from .problems.kmeans import PointSet
from .problems.kmedoids import DissimilarityMatrix
from .problems.rbm import BinaryDataset, RbmParams

KMEANS_MAX_N = 10
KMEANS_MAX_K = 3
KMEDOIDS_SUBSET_LIMIT = 10**6
HMM_PATH_LIMIT = 10**6
RBM_JOINT_LIMIT = 2**20


@dataclass(frozen=True)
class OracleResult:
    """Exact optimum plus the witness configuration and search-space size."""

    optimum_cost: float
    optimum_witness: Any
    search_space_size: int


def kmeans_bruteforce(data: PointSet, k: int) -> OracleResult:
    """Global WCSS minimum by enumerating all k^n assignments."""
    n = data.n
    if n > KMEANS_MAX_N or k > KMEANS_MAX_K:
        raise SizeGuardError(
            f"kmeans oracle limited to n <= {KMEANS_MAX_N}, k <= {KMEANS_MAX_K}"
        )
    pts = data.points
    best_cost = np.inf
    best_assign = None
    for assign in product(range(k), repeat=n):
        a = np.array(assign)
        cost = 0.0
        for c in range(k):
            members = pts[a == c]
            if len(members):
                cost += ((members - members.mean(axis=0)) ** 2).sum()
        if cost < best_cost:
            best_cost = cost
            best_assign = a
    return OracleResult(float(best_cost), best_assign, k**n)


def kmedoids_bruteforce(d: DissimilarityMatrix, k: int) -> OracleResult:
    """Global medoid-cost minimum over all C(n, k) medoid subsets."""
    from math import comb

    n = d.n
    size = comb(n, k)
    if size > KMEDOIDS_SUBSET_LIMIT:
        raise SizeGuardError(
            f"kmedoids oracle limited to C(n, k) <= {KMEDOIDS_SUBSET_LIMIT}, got {size}"
        )
    best_cost = np.inf
    best_medoids = None
    for subset in combinations(range(n), k):
        cost = d.d[:, subset].min(axis=1).sum()
        if cost < best_cost:
            best_cost = cost
            best_medoids = subset
    return OracleResult(float(best_cost), best_medoids, size)


def hmm_bruteforce(model, seq) -> float:
    """ln P(seq | model) by summing over every hidden state path."""
    n = model.n_states
    T = len(seq)
    if n**T > HMM_PATH_LIMIT:
        raise SizeGuardError(f"hmm oracle limited to N^T <= {HMM_PATH_LIMIT}")
    obs = seq.symbols
    paths = np.array(np.meshgrid(*[range(n)] * T, indexing="ij")).reshape(T, -1).T
    prob = model.pi[paths[:, 0]] * model.B[paths[:, 0], obs[0]]
    for t in range(1, T):
        prob = prob * model.A[paths[:, t - 1], paths[:, t]] * model.B[paths[:, t], obs[t]]
    total = prob.sum()
    return float(np.log(total)) if total > 0.0 else -np.inf


def rbm_bruteforce(params: RbmParams, data: BinaryDataset, lam: float) -> float:
    """Exact objective by enumerating the full joint (v, h) space."""
    nv, nh = params.n_visible, params.n_hidden
    if 2 ** (nv + nh) > RBM_JOINT_LIMIT:
        raise SizeGuardError(f"rbm oracle limited to 2^(nv+nh) <= {RBM_JOINT_LIMIT}")
    ints_v = np.arange(2**nv)
    v_all = ((ints_v[:, None] >> np.arange(nv - 1, -1, -1)) & 1).astype(float)
    ints_h = np.arange(2**nh)
    h_all = ((ints_h[:, None] >> np.arange(nh - 1, -1, -1)) & 1).astype(float)
    neg_energy = (
        (v_all @ params.a)[:, None]
        + (h_all @ params.b)[None, :]
        + v_all @ params.W @ h_all.T
    )
    log_z = logsumexp(neg_energy)
    keys = data.samples @ (2 ** np.arange(nv - 1, -1, -1, dtype=np.float64))
    idx = keys.astype(np.int64)
    log_pv = logsumexp(neg_energy[idx], axis=1) - log_z
    return float(log_pv.mean() - 0.5 * lam * (params.W**2).sum())


def finite_diff_gradient(
    objective: Callable[[np.ndarray], float], x: np.ndarray, h: float
) -> np.ndarray:
    """Central finite differences of a scalar function, one scalar at a time."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(x.size):
        plus = x.copy()
        minus = x.copy()
        plus.flat[i] += h
        minus.flat[i] -= h
        grad.flat[i] = (objective(plus) - objective(minus)) / (2.0 * h)
    return grad


def mc_validate_mlevel(
    epsilon: float, delta: float, trials: int, rng: np.random.Generator
) -> float:
    """Empirical success rate of the sized repetition count.

    Each trial performs required_reinits(delta, epsilon) independent
    attempts that succeed with probability epsilon; returns the fraction of
    trials with at least one success, which should be >= 1 - delta.
    """
    from .engine import MLevelParams, required_reinits

    m = required_reinits(MLevelParams(delta=delta, epsilon=epsilon))
    hits = (rng.random((trials, m)) < epsilon).any(axis=1)
    return float(hits.mean())
