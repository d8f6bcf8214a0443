"""Self-check suite: oracle cross-checks and invariant sweeps.

Each check is a named function returning (ok, detail); ``run_validation``
executes all of them. The suite is the quick health gate behind the CLI's
``validate`` subcommand; the pytest acceptance module runs the same ground
at larger case counts.
"""

from __future__ import annotations

import math

import numpy as np

from . import oracles
from .engine import Budget, Level, ReinitSchedule, full_schedule, run_hierarchy
from .problems.hmm import HmmProblem, ObsSeq, baum_welch_step, log_likelihood, random_model
from .problems.kmeans import KMeansProblem, KMeansState, PointSet, forgy_init, lloyd_step, wcss
from .problems.kmedoids import DissimilarityMatrix, KMedoidsProblem, init_medoids, medoid_cost, pam_step
from .problems.rbm import (
    BinaryDataset,
    RbmParams,
    RbmProblem,
    exact_gradient,
    exact_objective,
    gen_training_data,
)


def _random_rbm(rng, n_visible, n_hidden, scale=0.8):
    return RbmParams(
        rng.normal(0, scale, (n_visible, n_hidden)),
        rng.normal(0, scale, n_visible),
        rng.normal(0, scale, n_hidden),
    )


def check_hmm_likelihood_oracle(cases: int = 40, seed: int = 1) -> tuple[bool, str]:
    """Scaled forward log-likelihood vs. exhaustive path enumeration."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 5))
        t = int(rng.integers(1, 9))
        model = random_model(n, 2, rng)
        seq = ObsSeq(rng.integers(2, size=t), 2)
        exact = oracles.hmm_bruteforce(model, seq)
        scaled = log_likelihood(model, seq)
        worst = max(worst, abs(scaled - exact) / abs(exact) if exact != 0 else abs(scaled))
    ok = worst < 1e-10
    return ok, f"max relative deviation {worst:.3e} over {cases} models"


def check_rbm_objective_oracle(cases: int = 20, seed: int = 2) -> tuple[bool, str]:
    """Hidden-marginalised objective vs. joint (v, h) enumeration."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        nv = int(rng.integers(2, 7))
        nh = int(rng.integers(1, 7))
        params = _random_rbm(rng, nv, nh)
        data = BinaryDataset((rng.random((12, nv)) < 0.5).astype(float))
        lam = float(rng.choice([0.0, 0.01, 0.1]))
        a = exact_objective(params, data, lam)
        b = oracles.rbm_bruteforce(params, data, lam)
        worst = max(worst, abs(a - b) / abs(b))
    ok = worst < 1e-12
    return ok, f"max relative deviation {worst:.3e} over {cases} instances"


def check_rbm_gradient(cases: int = 8, seed: int = 3, grad_fn=exact_gradient) -> tuple[bool, str]:
    """Analytic gradient vs. central finite differences of the objective.

    ``grad_fn`` is injectable so a deliberately broken gradient can be shown
    to fail the check.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        nv = int(rng.integers(2, 5))
        nh = int(rng.integers(1, 5))
        params = _random_rbm(rng, nv, nh)
        data = BinaryDataset((rng.random((8, nv)) < 0.5).astype(float))
        lam = float(rng.choice([0.0, 0.05]))

        def objective(flat, nv=nv, nh=nh, data=data, lam=lam):
            return exact_objective(RbmParams.from_flat(flat, nv, nh), data, lam)

        numeric = oracles.finite_diff_gradient(objective, params.to_flat(), 1e-4)
        analytic = grad_fn(params, data, lam).to_flat()
        worst = max(worst, float(np.abs(analytic - numeric).max()))
    ok = worst < 1e-6
    return ok, f"max abs gradient deviation {worst:.3e} over {cases} instances"


def check_lloyd_monotone(cases: int = 200, seed: int = 4) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    data = PointSet(rng.normal(0, 5, (60, 2)))
    for _ in range(cases):
        state = forgy_init(data, int(rng.integers(2, 7)), rng)
        before = wcss(state, data)
        after = wcss(lloyd_step(state, data, rng), data)
        if after > before + 1e-9:
            return False, f"WCSS rose {before} -> {after}"
    return True, f"{cases} Lloyd steps, none increased WCSS"


def check_pam_monotone(cases: int = 200, seed: int = 5) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    pts = rng.normal(0, 5, (40, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    d = DissimilarityMatrix((diff**2).sum(axis=2))
    for _ in range(cases):
        state = init_medoids(d, int(rng.integers(2, 7)), rng)
        before = medoid_cost(state, d)
        after = medoid_cost(pam_step(state, d), d)
        if after > before + 1e-9:
            return False, f"medoid cost rose {before} -> {after}"
    return True, f"{cases} PAM iterations, none increased cost"


def check_bw_ascent(cases: int = 100, seed: int = 6) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        n = int(rng.integers(1, 5))
        t = int(rng.integers(2, 17))
        model = random_model(n, 2, rng)
        seq = ObsSeq(rng.integers(2, size=t), 2)
        stepped, ll_before = baum_welch_step(model, seq)
        ll_after = log_likelihood(stepped, seq)
        if ll_after < ll_before - 1e-9:
            return False, f"log-likelihood fell {ll_before} -> {ll_after}"
    return True, f"{cases} EM steps, ascent held within 1e-9"


def check_kmeans_recovery(seeds: int = 20) -> tuple[bool, str]:
    """Tiny two-cluster line instance must reach the enumerated optimum."""
    data = PointSet(np.array([[0.0], [1.0], [10.0], [11.0]]))
    target = oracles.kmeans_bruteforce(data, 2).optimum_cost
    problem = KMeansProblem(data, 2)
    schedule = ReinitSchedule([Level(1, 20), Level(2, None)])
    hits = 0
    for s in range(seeds):
        trace = run_hierarchy(problem, schedule, Budget(max_cost_evaluations=200), seed=s)
        if abs(trace.records[-1].best_cost - target) <= 1e-12 * max(target, 1.0):
            hits += 1
    ok = hits == seeds
    return ok, f"{hits}/{seeds} runs reached the enumerated optimum {target}"


def check_mlevel_bound(trials: int = 10_000, seed: int = 7) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    rate = oracles.mc_validate_mlevel(0.1, 0.01, trials, rng)
    floor = 0.99 - 3.0 * math.sqrt(0.0099 / trials)
    ok = rate >= floor
    return ok, f"success rate {rate:.4f} vs floor {floor:.4f}"


def check_reinit_locality(seed: int = 8) -> tuple[bool, str]:
    """Groups outside a reinitialised subset must stay bit-identical."""
    from .engine import PerturbationSpec

    rng = np.random.default_rng(seed)
    pert = PerturbationSpec()

    data = PointSet(rng.normal(0, 3, (30, 2)))
    km = KMeansProblem(data, 5)
    st = km.full_init(rng)
    new = km.reinit_groups(st, np.array([1, 3]), pert, rng)
    for c in (0, 2, 4):
        if not np.array_equal(new.centers[c], st.centers[c]):
            return False, f"kmeans center {c} moved"

    pts = rng.normal(0, 3, (20, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    kmed = KMedoidsProblem(DissimilarityMatrix((diff**2).sum(axis=2)), 4)
    ms = kmed.full_init(rng)
    new_ms = kmed.reinit_groups(ms, np.array([2]), pert, rng)
    if any(new_ms.medoids[s] != ms.medoids[s] for s in (0, 1, 3)):
        return False, "kmedoids slot outside subset moved"
    if len(set(new_ms.medoids.tolist())) != 4:
        return False, "kmedoids reinit produced duplicates"

    hp = HmmProblem(ObsSeq(rng.integers(2, size=12), 2), 6)
    hm = hp.full_init(rng)
    new_hm = hp.reinit_groups(hm, np.array([3]), pert, rng)
    mask = np.ones(6, bool)
    mask[3] = False
    if not (
        np.array_equal(new_hm.A[mask], hm.A[mask])
        and np.array_equal(new_hm.B[mask], hm.B[mask])
        and np.array_equal(new_hm.pi, hm.pi)
    ):
        return False, "hmm rows outside subset moved"

    rp = RbmProblem(gen_training_data(6, 20, 0.1, rng), 4)
    params = rp.full_init(rng)
    subset = np.array([0, 5, 17])
    new_p = rp.reinit_groups(params, subset, pert, rng)
    flat_old, flat_new = params.to_flat(), new_p.to_flat()
    untouched = np.ones(rp.group_count, bool)
    untouched[subset] = False
    if not np.array_equal(flat_new[untouched], flat_old[untouched]):
        return False, "rbm scalars outside subset moved"
    return True, "all four backends leave unnamed groups bit-identical"


def check_trace_monotone_and_deterministic() -> tuple[bool, str]:
    data = PointSet(np.array([[0.0], [1.0], [10.0], [11.0]]))
    problem = KMeansProblem(data, 2)
    schedule = full_schedule(2)
    budget = Budget(max_cost_evaluations=60)
    for seed in range(10):
        t1 = run_hierarchy(problem, schedule, budget, seed=seed)
        t2 = run_hierarchy(problem, schedule, budget, seed=seed)
        costs = [r.best_cost for r in t1.records]
        if any(b > a for a, b in zip(costs, costs[1:])):
            return False, f"best cost not monotone for seed {seed}"
        same = [
            (a.cost_evaluations, a.level0_calls, a.best_cost)
            == (b.cost_evaluations, b.level0_calls, b.best_cost)
            for a, b in zip(t1.records, t2.records)
        ]
        if len(t1.records) != len(t2.records) or not all(same):
            return False, f"rerun diverged for seed {seed}"
    return True, "10 seeded reruns identical, best cost monotone"


ALL_CHECKS = [
    ("hmm-likelihood-vs-enumeration", check_hmm_likelihood_oracle),
    ("rbm-objective-vs-enumeration", check_rbm_objective_oracle),
    ("rbm-gradient-vs-finite-diff", check_rbm_gradient),
    ("lloyd-monotone", check_lloyd_monotone),
    ("pam-monotone", check_pam_monotone),
    ("baum-welch-ascent", check_bw_ascent),
    ("kmeans-small-instance-recovery", check_kmeans_recovery),
    ("repetition-count-bound", check_mlevel_bound),
    ("reinit-locality", check_reinit_locality),
    ("trace-monotone-deterministic", check_trace_monotone_and_deterministic),
]


def run_validation() -> list[tuple[str, bool, str]]:
    """Run every check; returns (name, ok, detail) triples."""
    results = []
    for name, fn in ALL_CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
