"""Pure-numpy implementations of the inner-loop kernels.

These are the reference semantics; the compiled extension in
``_ckernels.pyx`` reproduces them (including random-draw order, so both
consume identical generator streams) and is preferred at import time when
available. Keep the two in lockstep: the equivalence tests compare them
step by step.

All functions mutate their state arrays in place and report the number of
inner iterations performed, which callers charge against evaluation budgets.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

STATUS_CONVERGED = 0
STATUS_CAP = 1
STATUS_INTERRUPTED = 2  # k-means: empty cluster needs a repair draw; HMM: zero-probability sequence


# --------------------------------------------------------------------------
# k-means (Lloyd iterations)
# --------------------------------------------------------------------------


def lloyd_run(points, centers, assignment, max_iter):
    """Alternate nearest-center assignment and centroid updates in place.

    Returns ``(iters, status, wcss)`` where ``iters`` counts assignment
    passes; at most ``max_iter`` are performed. On STATUS_INTERRUPTED some
    cluster ended up empty: the caller must repair the affected centers (a
    random data point each) and re-enter; centers are untouched and ``wcss``
    is invalid in that case.
    """
    n = len(points)
    iters = 0
    while True:
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        wcss = float(d2[np.arange(n), new_assign].sum())
        iters += 1
        counts = np.bincount(new_assign, minlength=len(centers))
        if (counts == 0).any():
            assignment[:] = new_assign
            return iters, STATUS_INTERRUPTED, -1.0
        assign_changed = not np.array_equal(new_assign, assignment)
        assignment[:] = new_assign
        if iters >= max_iter:
            # Centers left as-is so the reported cost matches the state.
            return iters, STATUS_CAP, wcss
        sums = np.zeros_like(centers)
        np.add.at(sums, new_assign, points)
        new_centers = sums / counts[:, None]
        centers_changed = not np.array_equal(new_centers, centers)
        centers[:] = new_centers
        if not assign_changed and not centers_changed:
            return iters, STATUS_CONVERGED, wcss


# --------------------------------------------------------------------------
# k-medoids (alternating assignment / per-cluster medoid election)
# --------------------------------------------------------------------------


def elect_medoids(d, medoids, assignment):
    """Per-cluster best-member election; returns True if any slot moved."""
    k = len(medoids)
    new_medoids = medoids.copy()
    for s in range(k):
        members = np.flatnonzero(assignment == s)
        if members.size == 0:
            continue  # keep the old medoid for an empty slot
        totals = d[np.ix_(members, members)].sum(axis=1)
        new_medoids[s] = members[totals.argmin()]
    # A retained medoid of an empty slot can collide with an elected one
    # when distinct points sit at zero distance; repoint deterministically.
    seen = set()
    for s in range(k):
        if int(new_medoids[s]) in seen:
            new_medoids[s] = next(i for i in range(d.shape[0]) if i not in seen)
        seen.add(int(new_medoids[s]))
    changed = not np.array_equal(new_medoids, medoids)
    medoids[:] = new_medoids
    return changed


def pam_run(d, medoids, assignment, max_iter):
    """Alternate nearest-medoid assignment and medoid election in place.

    Returns ``(iters, status, cost)``; ties go to the lowest slot or point
    index so runs are deterministic.
    """
    n = d.shape[0]
    iters = 0
    while True:
        dsub = d[:, medoids]
        new_assign = dsub.argmin(axis=1)
        cost = float(dsub[np.arange(n), new_assign].sum())
        iters += 1
        assign_changed = not np.array_equal(new_assign, assignment)
        assignment[:] = new_assign
        if iters >= max_iter:
            return iters, STATUS_CAP, cost
        medoids_changed = elect_medoids(d, medoids, assignment)
        if not assign_changed and not medoids_changed:
            return iters, STATUS_CONVERGED, cost


# --------------------------------------------------------------------------
# HMM (scaled forward pass and EM iterations)
# --------------------------------------------------------------------------


def hmm_forward_ll(pi, A, B, obs):
    """Log-likelihood of ``obs`` via the scaled forward recursion.

    Returns -inf when the sequence has probability zero under the model.
    """
    alpha = pi * B[:, obs[0]]
    total = alpha.sum()
    if total == 0.0:
        return -np.inf
    ll = np.log(total)
    alpha /= total
    for t in range(1, len(obs)):
        alpha = (alpha @ A) * B[:, obs[t]]
        total = alpha.sum()
        if total == 0.0:
            return -np.inf
        ll += np.log(total)
        alpha /= total
    return float(ll)


def _hmm_forward_backward(pi, A, B, obs):
    """Scaled forward-backward sweep.

    Returns ``(ll, alpha, beta, scale)``, or None for a zero-probability
    sequence. alpha and beta are scaled so ``alpha[t] * beta[t]`` is the
    state posterior at time t.
    """
    T = len(obs)
    n = len(pi)
    alpha = np.empty((T, n))
    scale = np.empty(T)
    a = pi * B[:, obs[0]]
    scale[0] = a.sum()
    if scale[0] == 0.0:
        return None
    alpha[0] = a / scale[0]
    for t in range(1, T):
        a = (alpha[t - 1] @ A) * B[:, obs[t]]
        scale[t] = a.sum()
        if scale[t] == 0.0:
            return None
        alpha[t] = a / scale[t]
    beta = np.empty((T, n))
    beta[T - 1] = 1.0
    for t in range(T - 2, -1, -1):
        beta[t] = (A @ (B[:, obs[t + 1]] * beta[t + 1])) / scale[t + 1]
    return float(np.log(scale).sum()), alpha, beta, scale


def _hmm_m_step(pi, A, B, obs, alpha, beta, scale):
    """Re-estimate (pi, A, B) in place from a forward-backward sweep.

    Rows whose occupation count is zero are kept, preserving stochasticity.
    """
    T = len(obs)
    gamma = alpha * beta
    if T > 1:
        xi_sum = np.zeros_like(A)
        for t in range(T - 1):
            xi_sum += np.outer(alpha[t], B[:, obs[t + 1]] * beta[t + 1] / scale[t + 1]) * A
        den_a = gamma[: T - 1].sum(axis=0)
        rows = den_a > 0.0
        A[rows] = xi_sum[rows] / den_a[rows, None]
    b_acc = np.zeros_like(B)
    for s in range(B.shape[1]):
        mask = obs == s
        if mask.any():
            b_acc[:, s] = gamma[mask].sum(axis=0)
    den_b = gamma.sum(axis=0)
    rows = den_b > 0.0
    B[rows] = b_acc[rows] / den_b[rows, None]
    pi[:] = gamma[0]


def hmm_bw_step(pi, A, B, obs):
    """One EM update of (pi, A, B) in place.

    Returns ``(ll, ok)`` where ``ll`` is the log-likelihood of the model
    *before* the update and ``ok`` is False on a zero-probability sequence
    (parameters are then left untouched).
    """
    fb = _hmm_forward_backward(pi, A, B, obs)
    if fb is None:
        return -np.inf, False
    ll, alpha, beta, scale = fb
    _hmm_m_step(pi, A, B, obs, alpha, beta, scale)
    return ll, True


def hmm_em_run(pi, A, B, obs, tol, max_iter):
    """Iterate EM updates in place until the log-likelihood gain drops
    below ``tol`` or ``max_iter`` forward passes have run.

    Returns ``(ll, iters, status)``; ``ll`` always belongs to the returned
    parameters (the M-step is skipped once convergence or the cap is hit).
    """
    ll_prev = None
    iters = 0
    while True:
        fb = _hmm_forward_backward(pi, A, B, obs)
        if fb is None:
            return -np.inf, iters + 1, STATUS_INTERRUPTED
        ll, alpha, beta, scale = fb
        iters += 1
        if ll_prev is not None and ll - ll_prev < tol:
            return ll, iters, STATUS_CONVERGED
        if iters >= max_iter:
            return ll, iters, STATUS_CAP
        _hmm_m_step(pi, A, B, obs, alpha, beta, scale)
        ll_prev = ll


# --------------------------------------------------------------------------
# RBM (contrastive-divergence gradient ascent)
# --------------------------------------------------------------------------


def rbm_cd_epoch(W, a, b, data, gibbs_k, lam, rng):
    """One full-batch CD-k gradient estimate; does not touch the parameters.

    Returns ``(gW, ga, gb)``. The data term clamps the visible units to the
    batch and uses hidden probabilities; the model term comes from ``k``
    alternating Gibbs steps started at the data, with probabilities rather
    than samples at the final hidden update. Draw order is part of the
    contract: hidden sample first, then per Gibbs step a visible sample and
    (except at the last step) a hidden sample.
    """
    n = data.shape[0]
    ph0 = expit(b + data @ W)
    h = rng.random(ph0.shape) < ph0
    for step in range(gibbs_k):
        pv = expit(a + h @ W.T)
        v = rng.random(pv.shape) < pv
        ph = expit(b + v @ W)
        if step < gibbs_k - 1:
            h = rng.random(ph.shape) < ph
    gw = (data.T @ ph0 - v.T @ ph) / n - lam * W
    ga = (data - v).mean(axis=0)
    gb = (ph0 - ph).mean(axis=0)
    return gw, ga, gb


def rbm_cd_run(W, a, b, data, gibbs_k, lr, lam, epochs, bit_generator):
    """Run ``epochs`` full-batch CD-k ascent steps, updating in place."""
    rng = np.random.Generator(bit_generator)
    for _ in range(epochs):
        gw, ga, gb = rbm_cd_epoch(W, a, b, data, gibbs_k, lam, rng)
        W += lr * gw
        a += lr * ga
        b += lr * gb
