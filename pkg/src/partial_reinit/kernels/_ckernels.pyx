# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Semantics, return values and random-draw order match the pure-numpy
versions; see that module for the documented contracts. Floating-point
results may differ in the last bits because summation order differs from
BLAS, so cross-implementation tests compare with tolerances.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport INFINITY, exp, log
from numpy.random cimport bitgen_t

cnp.import_array()

STATUS_CONVERGED = 0
STATUS_CAP = 1
STATUS_INTERRUPTED = 2


# --------------------------------------------------------------------------
# k-means
# --------------------------------------------------------------------------


def lloyd_run(double[:, ::1] points, double[:, ::1] centers,
              cnp.int64_t[::1] assignment, Py_ssize_t max_iter):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t dim = points.shape[1]
    cdef Py_ssize_t k = centers.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts_arr = np.zeros(k, dtype=np.int64)
    cdef cnp.ndarray[cnp.double_t, ndim=2] sums_arr = np.zeros((k, dim), dtype=np.float64)
    cdef cnp.int64_t[::1] counts = counts_arr
    cdef double[:, ::1] sums = sums_arr
    cdef Py_ssize_t iters = 0, i, c, j, best
    cdef double wcss, dist, diff, best_dist, val
    cdef bint assign_changed, centers_changed, any_empty

    with nogil:
        while True:
            wcss = 0.0
            assign_changed = False
            for c in range(k):
                counts[c] = 0
                for j in range(dim):
                    sums[c, j] = 0.0
            for i in range(n):
                best = 0
                best_dist = INFINITY
                for c in range(k):
                    dist = 0.0
                    for j in range(dim):
                        diff = points[i, j] - centers[c, j]
                        dist += diff * diff
                    if dist < best_dist:
                        best_dist = dist
                        best = c
                wcss += best_dist
                if assignment[i] != best:
                    assign_changed = True
                    assignment[i] = best
                counts[best] += 1
                for j in range(dim):
                    sums[best, j] += points[i, j]
            iters += 1
            any_empty = False
            for c in range(k):
                if counts[c] == 0:
                    any_empty = True
                    break
            if any_empty:
                with gil:
                    return iters, STATUS_INTERRUPTED, -1.0
            if iters >= max_iter:
                with gil:
                    return iters, STATUS_CAP, wcss
            centers_changed = False
            for c in range(k):
                for j in range(dim):
                    val = sums[c, j] / counts[c]
                    if val != centers[c, j]:
                        centers_changed = True
                        centers[c, j] = val
            if not assign_changed and not centers_changed:
                with gil:
                    return iters, STATUS_CONVERGED, wcss


# --------------------------------------------------------------------------
# k-medoids
# --------------------------------------------------------------------------


def pam_run(double[:, ::1] d, cnp.int64_t[::1] medoids,
            cnp.int64_t[::1] assignment, Py_ssize_t max_iter):
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t k = medoids.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] members_arr = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] newmed_arr = np.empty(k, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.int64_t[::1] members = members_arr
    cdef cnp.int64_t[::1] new_medoids = newmed_arr
    cdef cnp.uint8_t[::1] used = used_arr
    cdef Py_ssize_t iters = 0, i, s, m, mm, best, count
    cdef cnp.int64_t cand, med
    cdef double cost, best_dist, dist, total, best_total
    cdef bint assign_changed, medoids_changed, dup

    with nogil:
        while True:
            cost = 0.0
            assign_changed = False
            for i in range(n):
                best = 0
                best_dist = INFINITY
                for s in range(k):
                    dist = d[i, medoids[s]]
                    if dist < best_dist:
                        best_dist = dist
                        best = s
                cost += best_dist
                if assignment[i] != best:
                    assign_changed = True
                    assignment[i] = best
            iters += 1
            if iters >= max_iter:
                with gil:
                    return iters, STATUS_CAP, cost
            # Elect the in-cluster point with the least summed dissimilarity.
            for s in range(k):
                count = 0
                for i in range(n):
                    if assignment[i] == s:
                        members[count] = i
                        count += 1
                if count == 0:
                    new_medoids[s] = medoids[s]
                    continue
                best_total = INFINITY
                best = 0
                for m in range(count):
                    cand = members[m]
                    total = 0.0
                    for mm in range(count):
                        total += d[cand, members[mm]]
                    if total < best_total:
                        best_total = total
                        best = m
                new_medoids[s] = members[best]
            # Deterministic de-duplication for degenerate zero-distance data.
            for i in range(n):
                used[i] = 0
            for s in range(k):
                med = new_medoids[s]
                if used[med]:
                    dup = True
                    for i in range(n):
                        if not used[i]:
                            med = i
                            break
                    new_medoids[s] = med
                used[med] = 1
            medoids_changed = False
            for s in range(k):
                if new_medoids[s] != medoids[s]:
                    medoids_changed = True
                    medoids[s] = new_medoids[s]
            if not assign_changed and not medoids_changed:
                with gil:
                    return iters, STATUS_CONVERGED, cost


# --------------------------------------------------------------------------
# HMM
# --------------------------------------------------------------------------


def hmm_forward_ll(double[::1] pi, double[:, ::1] A, double[:, ::1] B,
                   cnp.int64_t[::1] obs):
    cdef Py_ssize_t T = obs.shape[0]
    cdef Py_ssize_t n = pi.shape[0]
    cdef cnp.ndarray[cnp.double_t, ndim=1] cur_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.double_t, ndim=1] prev_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] cur = cur_arr
    cdef double[::1] prev = prev_arr
    cdef Py_ssize_t t, i, j
    cdef double total, ll, acc

    with nogil:
        total = 0.0
        for i in range(n):
            cur[i] = pi[i] * B[i, obs[0]]
            total += cur[i]
        if total == 0.0:
            with gil:
                return -INFINITY
        ll = log(total)
        for i in range(n):
            cur[i] /= total
        for t in range(1, T):
            for i in range(n):
                prev[i] = cur[i]
            total = 0.0
            for j in range(n):
                acc = 0.0
                for i in range(n):
                    acc += prev[i] * A[i, j]
                cur[j] = acc * B[j, obs[t]]
                total += cur[j]
            if total == 0.0:
                with gil:
                    return -INFINITY
            ll += log(total)
            for j in range(n):
                cur[j] /= total
    return ll


cdef int _hmm_sweep(double[::1] pi, double[:, ::1] A, double[:, ::1] B,
                    cnp.int64_t[::1] obs, double[:, ::1] alpha,
                    double[:, ::1] beta, double[::1] scale,
                    double *ll_out) noexcept nogil:
    """Scaled forward-backward pass; returns 0, or 1 on zero probability."""
    cdef Py_ssize_t T = obs.shape[0]
    cdef Py_ssize_t n = pi.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double total, acc, ll
    total = 0.0
    for i in range(n):
        alpha[0, i] = pi[i] * B[i, obs[0]]
        total += alpha[0, i]
    if total == 0.0:
        return 1
    scale[0] = total
    ll = log(total)
    for i in range(n):
        alpha[0, i] /= total
    for t in range(1, T):
        total = 0.0
        for j in range(n):
            acc = 0.0
            for i in range(n):
                acc += alpha[t - 1, i] * A[i, j]
            acc *= B[j, obs[t]]
            alpha[t, j] = acc
            total += acc
        if total == 0.0:
            return 1
        scale[t] = total
        ll += log(total)
        for j in range(n):
            alpha[t, j] /= total
    for i in range(n):
        beta[T - 1, i] = 1.0
    for t in range(T - 2, -1, -1):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += A[i, j] * B[j, obs[t + 1]] * beta[t + 1, j]
            beta[t, i] = acc / scale[t + 1]
    ll_out[0] = ll
    return 0


cdef void _hmm_m_step(double[::1] pi, double[:, ::1] A, double[:, ::1] B,
                      cnp.int64_t[::1] obs, double[:, ::1] alpha,
                      double[:, ::1] beta, double[::1] scale,
                      double[:, ::1] xi_sum, double[::1] den_a,
                      double[::1] den_b, double[:, ::1] b_acc) noexcept nogil:
    cdef Py_ssize_t T = obs.shape[0]
    cdef Py_ssize_t n = pi.shape[0]
    cdef Py_ssize_t n_sym = B.shape[1]
    cdef Py_ssize_t t, i, j, s
    cdef double g, w
    for i in range(n):
        den_a[i] = 0.0
        den_b[i] = 0.0
        for j in range(n):
            xi_sum[i, j] = 0.0
        for s in range(n_sym):
            b_acc[i, s] = 0.0
    for t in range(T):
        for i in range(n):
            g = alpha[t, i] * beta[t, i]
            den_b[i] += g
            b_acc[i, obs[t]] += g
            if t < T - 1:
                den_a[i] += g
        if t < T - 1:
            for i in range(n):
                w = alpha[t, i]
                for j in range(n):
                    xi_sum[i, j] += w * A[i, j] * B[j, obs[t + 1]] * beta[t + 1, j] / scale[t + 1]
    if T > 1:
        for i in range(n):
            if den_a[i] > 0.0:
                for j in range(n):
                    A[i, j] = xi_sum[i, j] / den_a[i]
    for i in range(n):
        if den_b[i] > 0.0:
            for s in range(n_sym):
                B[i, s] = b_acc[i, s] / den_b[i]
    for i in range(n):
        pi[i] = alpha[0, i] * beta[0, i]


def hmm_em_run(double[::1] pi, double[:, ::1] A, double[:, ::1] B,
               cnp.int64_t[::1] obs, double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t T = obs.shape[0]
    cdef Py_ssize_t n = pi.shape[0]
    cdef Py_ssize_t n_sym = B.shape[1]
    cdef cnp.ndarray[cnp.double_t, ndim=2] alpha_arr = np.empty((T, n))
    cdef cnp.ndarray[cnp.double_t, ndim=2] beta_arr = np.empty((T, n))
    cdef cnp.ndarray[cnp.double_t, ndim=1] scale_arr = np.empty(T)
    cdef cnp.ndarray[cnp.double_t, ndim=2] xi_arr = np.empty((n, n))
    cdef cnp.ndarray[cnp.double_t, ndim=1] dena_arr = np.empty(n)
    cdef cnp.ndarray[cnp.double_t, ndim=1] denb_arr = np.empty(n)
    cdef cnp.ndarray[cnp.double_t, ndim=2] bacc_arr = np.empty((n, n_sym))
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[::1] scale = scale_arr
    cdef double[:, ::1] xi_sum = xi_arr
    cdef double[::1] den_a = dena_arr
    cdef double[::1] den_b = denb_arr
    cdef double[:, ::1] b_acc = bacc_arr
    cdef Py_ssize_t iters = 0
    cdef double ll = 0.0, ll_prev = 0.0
    cdef bint have_prev = False
    cdef int bad

    with nogil:
        while True:
            bad = _hmm_sweep(pi, A, B, obs, alpha, beta, scale, &ll)
            if bad:
                with gil:
                    return -INFINITY, iters + 1, STATUS_INTERRUPTED
            iters += 1
            if have_prev and ll - ll_prev < tol:
                with gil:
                    return ll, iters, STATUS_CONVERGED
            if iters >= max_iter:
                with gil:
                    return ll, iters, STATUS_CAP
            _hmm_m_step(pi, A, B, obs, alpha, beta, scale,
                        xi_sum, den_a, den_b, b_acc)
            ll_prev = ll
            have_prev = True


# --------------------------------------------------------------------------
# RBM
# --------------------------------------------------------------------------


cdef inline double _sigmoid(double x) noexcept nogil:
    cdef double e
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    e = exp(x)
    return e / (1.0 + e)


def rbm_cd_run(double[:, ::1] W, double[::1] a, double[::1] b,
               double[:, ::1] data, Py_ssize_t gibbs_k, double lr,
               double lam, Py_ssize_t epochs, bit_generator):
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t nv = W.shape[0]
    cdef Py_ssize_t nh = W.shape[1]
    cdef cnp.ndarray[cnp.double_t, ndim=2] ph0_arr = np.empty((n, nh))
    cdef cnp.ndarray[cnp.double_t, ndim=2] ph_arr = np.empty((n, nh))
    cdef cnp.ndarray[cnp.double_t, ndim=2] h_arr = np.empty((n, nh))
    cdef cnp.ndarray[cnp.double_t, ndim=2] v_arr = np.empty((n, nv))
    cdef cnp.ndarray[cnp.double_t, ndim=2] gw_arr = np.empty((nv, nh))
    cdef cnp.ndarray[cnp.double_t, ndim=1] acc_arr = np.empty(max(nv, nh))
    cdef double[:, ::1] ph0 = ph0_arr
    cdef double[:, ::1] ph = ph_arr
    cdef double[:, ::1] h = h_arr
    cdef double[:, ::1] v = v_arr
    cdef double[:, ::1] gw = gw_arr
    cdef double[::1] acc = acc_arr
    cdef bitgen_t *rng
    cdef const char *capsule_name = "BitGenerator"
    cdef Py_ssize_t e, r, i, j, step
    cdef double p, s, vi, inv_n = 1.0 / n

    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, capsule_name):
        raise ValueError("invalid BitGenerator capsule")
    rng = <bitgen_t *> PyCapsule_GetPointer(capsule, capsule_name)

    with bit_generator.lock, nogil:
        for e in range(epochs):
            # Hidden probabilities for the clamped data, and the h0 sample.
            for r in range(n):
                for j in range(nh):
                    acc[j] = b[j]
                for i in range(nv):
                    vi = data[r, i]
                    if vi != 0.0:
                        for j in range(nh):
                            acc[j] += vi * W[i, j]
                for j in range(nh):
                    p = _sigmoid(acc[j])
                    ph0[r, j] = p
                    h[r, j] = 1.0 if rng.next_double(rng.state) < p else 0.0
            # Alternating Gibbs chain started at the data.
            for step in range(gibbs_k):
                for r in range(n):
                    for i in range(nv):
                        s = a[i]
                        for j in range(nh):
                            s += h[r, j] * W[i, j]
                        v[r, i] = 1.0 if rng.next_double(rng.state) < _sigmoid(s) else 0.0
                for r in range(n):
                    for j in range(nh):
                        acc[j] = b[j]
                    for i in range(nv):
                        vi = v[r, i]
                        if vi != 0.0:
                            for j in range(nh):
                                acc[j] += vi * W[i, j]
                    if step < gibbs_k - 1:
                        for j in range(nh):
                            p = _sigmoid(acc[j])
                            ph[r, j] = p
                            h[r, j] = 1.0 if rng.next_double(rng.state) < p else 0.0
                    else:
                        for j in range(nh):
                            ph[r, j] = _sigmoid(acc[j])
            # Gradient ascent step:
            # (data'ph0 - v'ph)/n - lam*W for weights, unit means for biases.
            for i in range(nv):
                for j in range(nh):
                    gw[i, j] = 0.0
            for r in range(n):
                for i in range(nv):
                    vi = data[r, i]
                    if vi != 0.0:
                        for j in range(nh):
                            gw[i, j] += vi * ph0[r, j]
                    vi = v[r, i]
                    if vi != 0.0:
                        for j in range(nh):
                            gw[i, j] -= vi * ph[r, j]
            for i in range(nv):
                for j in range(nh):
                    W[i, j] += lr * (gw[i, j] * inv_n - lam * W[i, j])
            for i in range(nv):
                s = 0.0
                for r in range(n):
                    s += data[r, i] - v[r, i]
                a[i] += lr * s * inv_n
            for j in range(nh):
                s = 0.0
                for r in range(n):
                    s += ph0[r, j] - ph[r, j]
                b[j] += lr * s * inv_n
