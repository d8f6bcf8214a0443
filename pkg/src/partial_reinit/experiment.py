"""Experiment configuration and seeded run fan-out.

An experiment is a JSON document naming a problem, an instance (file path
or generator spec), a reinitialisation schedule, a budget and a list of
seeds. ``mode`` selects between the configured multi-level schedule
("partial") and the classic restart baseline ("full"), which is the same
machinery with a single all-groups level, so both modes share every code
path except the schedule itself.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
from pathlib import Path

import numpy as np

from . import datasets
from .engine import (
    BernoulliMaskPicker,
    Budget,
    Level,
    PerturbationSpec,
    ReinitSchedule,
    RunTrace,
    full_schedule,
    run_hierarchy,
)
from .errors import ConfigurationError
from .kernels import backend_name
from .problems import (
    BinaryDataset,
    CdConfig,
    DissimilarityMatrix,
    HmmProblem,
    KMeansProblem,
    KMedoidsProblem,
    ObsSeq,
    PointSet,
    RbmProblem,
    ResetPolicy,
)

PROBLEM_NAMES = ("kmeans", "kmedoids", "hmm", "rbm")


def config_hash(config: dict) -> str:
    """Stable hash of the canonical JSON form of a config."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def resolve_seeds(spec) -> list[int]:
    if isinstance(spec, list):
        seeds = [int(s) for s in spec]
    elif isinstance(spec, dict):
        try:
            count = int(spec["count"])
        except KeyError as exc:
            raise ConfigurationError("seed spec dict needs a 'count' key") from exc
        start = int(spec.get("start", 0))
        seeds = list(range(start, start + count))
    else:
        raise ConfigurationError(f"seeds must be a list or a count spec, got {spec!r}")
    if not seeds:
        raise ConfigurationError("need at least one seed")
    return seeds


def _load_instance(instance: dict):
    if not isinstance(instance, dict):
        raise ConfigurationError("instance must be an object")
    if "path" in instance:
        return None  # resolved per problem kind below
    if "generator" in instance:
        gen = instance["generator"]
        rng = np.random.default_rng(int(gen.get("seed", 0)))
        return datasets.generate_from_spec(gen, rng)
    raise ConfigurationError("instance needs either 'path' or 'generator'")


def build_problem(config: dict):
    """Instantiate the problem backend named by a config."""
    kind = config.get("problem")
    if kind not in PROBLEM_NAMES:
        raise ConfigurationError(f"unknown problem {kind!r}; expected one of {PROBLEM_NAMES}")
    params = config.get("problem_params", {})
    instance = config.get("instance")
    if instance is None:
        raise ConfigurationError("config needs an 'instance'")
    data = _load_instance(instance)
    path = instance.get("path")

    if kind == "kmeans":
        if data is None:
            data = datasets.load_points(path)
        if not isinstance(data, PointSet):
            raise ConfigurationError("kmeans needs a point-set instance")
        return KMeansProblem(data, k=int(params["k"]))
    if kind == "kmedoids":
        if data is None:
            data = datasets.load_dissimilarity(path)
        if not isinstance(data, DissimilarityMatrix):
            raise ConfigurationError("kmedoids needs a dissimilarity instance")
        return KMedoidsProblem(data, k=int(params["k"]))
    if kind == "hmm":
        if data is None:
            data = datasets.load_bitstring(path)
        if not isinstance(data, ObsSeq):
            raise ConfigurationError("hmm needs a bit-string instance")
        return HmmProblem(
            data,
            n_states=int(params["n_states"]),
            ll_tol=float(params.get("ll_tol", 1e-8)),
            max_iter=int(params.get("max_iter", 1000)),
        )
    if data is None:
        data = datasets.load_binary_dataset(path)
    if not isinstance(data, BinaryDataset):
        raise ConfigurationError("rbm needs a binary-dataset instance")
    cd = CdConfig(**params.get("cd", {}))
    reset = ResetPolicy(**params.get("reset", {}))
    return RbmProblem(data, n_hidden=int(params["n_hidden"]), cd=cd, reset=reset)


def build_schedule(config: dict, group_count: int) -> ReinitSchedule:
    mode = config.get("mode", "partial")
    levels_spec = config.get("levels")
    if mode == "full":
        if levels_spec:
            raise ConfigurationError("mode=full implies a single all-groups level; drop 'levels'")
        return full_schedule(group_count)
    if mode != "partial":
        raise ConfigurationError(f"mode must be 'partial' or 'full', got {mode!r}")
    if not levels_spec:
        raise ConfigurationError("mode=partial needs a 'levels' list")
    levels = []
    for spec in levels_spec:
        reinits = spec.get("reinits")
        if "bernoulli" in spec:
            levels.append(
                Level(
                    k=int(spec.get("k", group_count)),
                    reinits=None if reinits is None else int(reinits),
                    picker=BernoulliMaskPicker(float(spec["bernoulli"])),
                )
            )
        else:
            try:
                k = int(spec["k"])
            except KeyError as exc:
                raise ConfigurationError(f"level {spec!r} needs 'k' or 'bernoulli'") from exc
            levels.append(Level(k=k, reinits=None if reinits is None else int(reinits)))
    return ReinitSchedule(levels)


def build_budget(config: dict) -> Budget:
    spec = config.get("budget")
    if not isinstance(spec, dict):
        raise ConfigurationError("config needs a 'budget' object")
    known = {"max_level0_calls", "max_cost_evaluations", "max_wall_seconds"}
    unknown = set(spec) - known
    if unknown:
        raise ConfigurationError(f"unknown budget keys {sorted(unknown)}")
    return Budget(**spec)


def build_perturbation(config: dict) -> PerturbationSpec:
    return PerturbationSpec(**config.get("perturbation", {}))


def _run_one(problem, schedule, budget, perturbation, seed, out_dir) -> tuple[int, float, int]:
    from .traces import write_trace_csv

    trace = run_hierarchy(problem, schedule, budget, perturbation, seed)
    if out_dir is not None:
        write_trace_csv(Path(out_dir) / f"trace_{seed}.csv", trace)
    last = trace.records[-1]
    return seed, last.best_cost, last.cost_evaluations


def run_experiment(
    config: dict, out_dir, seed_offset: int = 0, jobs: int = 1
) -> dict:
    """Run every seed of an experiment, writing traces and a summary.

    Traces are bit-reproducible for evaluation- or call-bounded budgets;
    the summary records the config hash so reruns are comparable.
    """
    problem = build_problem(config)
    schedule = build_schedule(config, problem.group_count)
    schedule.validate_for(problem.group_count)
    budget = build_budget(config)
    perturbation = build_perturbation(config)
    seeds = [s + seed_offset for s in resolve_seeds(config.get("seeds"))]
    if len(set(seeds)) != len(seeds):
        raise ConfigurationError("seeds must be distinct")

    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)

    args = [(problem, schedule, budget, perturbation, seed, out) for seed in seeds]
    if jobs > 1:
        with multiprocessing.Pool(jobs) as pool:
            results = pool.starmap(_run_one, args)
    else:
        results = [_run_one(*a) for a in args]

    results.sort()
    summary = {
        "config_hash": config_hash(config),
        "problem": config["problem"],
        "mode": config.get("mode", "partial"),
        "kernel_backend": backend_name(),
        "seeds": [r[0] for r in results],
        "final_costs": {str(r[0]): r[1] for r in results},
        "total_evals": int(sum(r[2] for r in results)),
        "median_final_cost": float(np.median([r[1] for r in results])),
    }
    if out is not None:
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return summary


def run_experiment_traces(config: dict, seed_offset: int = 0) -> list[RunTrace]:
    """In-memory variant used by tests and the validation suite."""
    problem = build_problem(config)
    schedule = build_schedule(config, problem.group_count)
    budget = build_budget(config)
    perturbation = build_perturbation(config)
    seeds = [s + seed_offset for s in resolve_seeds(config.get("seeds"))]
    return [run_hierarchy(problem, schedule, budget, perturbation, s) for s in seeds]
