"""Hierarchical partial-reinitialisation engine.

A run walks a hierarchy of levels. Each level repeatedly snapshots the
current configuration, resamples a subset of its variable groups, hands the
result to the level below, and reverts to the snapshot whenever the nested
levels came back with something strictly worse. Level 0 is the problem's own
local optimiser. The top level loops until the budget is exhausted, so a
local optimiser wrapped this way behaves like a global one: the best cost
seen can only go down.

Two deliberate conventions, both load-bearing:

* A subset is resampled once per loop iteration, each with its own
  checkpoint, so a level with ``reinits=M`` performs M independent
  escape attempts from the configuration its parent handed down.
* Comparisons use strict ``>``: an equal-cost configuration replaces the
  checkpoint, which lets runs drift across cost plateaus.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, NumericError

__all__ = [
    "Budget",
    "Configuration",
    "Level",
    "MLevelParams",
    "PerturbationSpec",
    "ReinitSchedule",
    "RunTrace",
    "TraceRecord",
    "BernoulliMaskPicker",
    "UniformSubsetPicker",
    "checkpoint_accept",
    "full_schedule",
    "perturb_value",
    "pick_random_subset",
    "required_reinits",
    "run_hierarchy",
]


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------


@dataclass
class Configuration:
    """A problem state plus an optional cached cost.

    ``state`` is the backend-owned container of variable groups (cluster
    centers, medoid slots, per-hidden-state parameter rows, RBM scalars).
    ``cached_cost``, when set, must equal the owning problem's cost of
    ``state``; the engine invalidates it on every reinitialisation.
    """

    state: Any
    cached_cost: float | None = None


@dataclass(frozen=True)
class PerturbationSpec:
    """How a resampled variable is blended with its previous value.

    ``alpha = 0`` (the default used by every benchmark) means a full
    resample from the problem's own initialisation distribution. With
    ``alpha > 0`` a continuous backend blends instead:
    ``new = alpha * old + (1 - alpha) * normal(mu, sigma)``.
    """

    alpha: float = 0.0
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.sigma < 0.0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class MLevelParams:
    """Confidence parameters for sizing a level's repetition count.

    ``epsilon`` is the assumed per-attempt improvement probability,
    ``delta`` the acceptable probability of declaring a configuration
    locally unimprovable when it is not.
    """

    delta: float
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must be in (0, 1), got {self.delta}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must be in (0, 1), got {self.epsilon}")


class UniformSubsetPicker:
    """Picks a uniformly random k-subset of group indices."""

    def __init__(self, k: int):
        self.k = k

    def pick(self, n_groups: int, rng: np.random.Generator) -> np.ndarray:
        return pick_random_subset(n_groups, self.k, rng)

    def __repr__(self):
        return f"UniformSubsetPicker(k={self.k})"


class BernoulliMaskPicker:
    """Selects each group independently with a fixed probability.

    The selection size is binomial rather than fixed, so a level using this
    picker declares ``k`` equal to the full group count: any group may be hit.
    """

    def __init__(self, prob: float):
        if not 0.0 <= prob <= 1.0:
            raise DomainError(f"prob must be in [0, 1], got {prob}")
        self.prob = prob

    def pick(self, n_groups: int, rng: np.random.Generator) -> np.ndarray:
        mask = rng.random(n_groups) < self.prob
        return np.flatnonzero(mask)

    def __repr__(self):
        return f"BernoulliMaskPicker(prob={self.prob})"


@dataclass(frozen=True)
class Level:
    """One hierarchy level: subset size ``k`` and repetition count ``reinits``.

    ``reinits=None`` means unbounded, allowed only at the top level where the
    budget cuts the loop. ``picker`` overrides the default uniform k-subset
    selection; it must be consistent with the declared ``k``.
    """

    k: int
    reinits: int | None
    picker: Any = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"level subset size must be >= 1, got {self.k}")
        if self.reinits is not None and self.reinits < 1:
            raise ConfigurationError(
                f"level repetition count must be >= 1, got {self.reinits}"
            )

    def make_picker(self):
        return self.picker if self.picker is not None else UniformSubsetPicker(self.k)


@dataclass(frozen=True)
class ReinitSchedule:
    """The hierarchy of levels, ordered bottom (smallest subsets) to top.

    Subset sizes must be strictly increasing and the top level must cover
    every group, so climbing the hierarchy ends in a full reinitialisation.
    """

    levels: tuple[Level, ...]

    def __init__(self, levels: Sequence[Level]):
        object.__setattr__(self, "levels", tuple(levels))
        if not self.levels:
            raise ConfigurationError("schedule needs at least one level")
        ks = [lv.k for lv in self.levels]
        if any(a >= b for a, b in zip(ks, ks[1:])):
            raise ConfigurationError(f"subset sizes must strictly increase, got {ks}")
        for lv in self.levels[:-1]:
            if lv.reinits is None:
                raise ConfigurationError(
                    "only the top level may have an unbounded repetition count"
                )

    @property
    def depth(self) -> int:
        return len(self.levels)

    def validate_for(self, group_count: int) -> None:
        """Check the schedule against a problem's group count."""
        top = self.levels[-1]
        if top.k != group_count:
            raise ConfigurationError(
                f"top level must cover all {group_count} groups, got k={top.k}"
            )
        if self.levels[0].k > group_count:
            raise ConfigurationError(
                f"subset size {self.levels[0].k} exceeds group count {group_count}"
            )


def full_schedule(n_groups: int) -> ReinitSchedule:
    """The classic restart baseline: a single level resampling every group."""
    return ReinitSchedule([Level(k=n_groups, reinits=None)])


@dataclass(frozen=True)
class Budget:
    """Stopping criteria for one run; at least one bound must be set.

    ``max_cost_evaluations`` counts objective-function work units: every
    explicit cost call plus every inner iteration a backend reports from its
    local optimiser (each such iteration evaluates the objective as a
    byproduct). This makes evaluation-bounded comparisons between schedules
    fair regardless of how often level 0 is entered.
    """

    max_level0_calls: int | None = None
    max_cost_evaluations: int | None = None
    max_wall_seconds: float | None = None

    def __post_init__(self):
        bounds = (
            self.max_level0_calls,
            self.max_cost_evaluations,
            self.max_wall_seconds,
        )
        if all(b is None for b in bounds):
            raise ConfigurationError("budget must set at least one bound")
        if any(b is not None and b <= 0 for b in bounds):
            raise ConfigurationError(f"budget bounds must be positive, got {self}")


class TraceRecord(tuple):
    """(cost_evaluations, level0_calls, wall_seconds, best_cost)."""

    __slots__ = ()

    def __new__(cls, cost_evaluations, level0_calls, wall_seconds, best_cost):
        return super().__new__(
            cls, (int(cost_evaluations), int(level0_calls), float(wall_seconds), float(best_cost))
        )

    @property
    def cost_evaluations(self):
        return self[0]

    @property
    def level0_calls(self):
        return self[1]

    @property
    def wall_seconds(self):
        return self[2]

    @property
    def best_cost(self):
        return self[3]


@dataclass
class RunTrace:
    """Counter-stamped series of best-cost values for one seeded run."""

    seed: int
    records: list[TraceRecord] = field(default_factory=list)
    final_best: Configuration | None = None

    def record(self, cost_evaluations, level0_calls, wall_seconds, best_cost) -> None:
        """Append a record, enforcing monotone counters and best cost."""
        rec = TraceRecord(cost_evaluations, level0_calls, wall_seconds, best_cost)
        if self.records:
            last = self.records[-1]
            if rec.best_cost > last.best_cost:
                raise NumericError(
                    f"best cost regressed: {last.best_cost} -> {rec.best_cost}"
                )
            if (
                rec.cost_evaluations < last.cost_evaluations
                or rec.level0_calls < last.level0_calls
                or rec.wall_seconds < last.wall_seconds
            ):
                raise NumericError("trace counters must be non-decreasing")
        self.records.append(rec)

    @property
    def best_cost(self) -> float:
        return self.records[-1].best_cost if self.records else math.inf


# --------------------------------------------------------------------------
# Elementary operations
# --------------------------------------------------------------------------


def required_reinits(params: MLevelParams) -> int:
    """Repetitions needed so a level misses an eps-likely improvement with
    probability at most delta: ceil(ln(delta) / ln(1 - eps)), at least 1."""
    m = math.ceil(math.log(params.delta) / math.log(1.0 - params.epsilon))
    return max(m, 1)


def perturb_value(x, spec: PerturbationSpec, rng: np.random.Generator):
    """Blend ``x`` with fresh normal noise: alpha*x + (1-alpha)*N(mu, sigma).

    Accepts scalars or arrays; one independent draw per element.
    """
    x = np.asarray(x, dtype=float)
    noise = rng.normal(spec.mu, spec.sigma, size=x.shape)
    out = spec.alpha * x + (1.0 - spec.alpha) * noise
    return float(out) if out.ndim == 0 else out


def pick_random_subset(n_groups: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """k distinct group indices, uniform over all k-subsets, sorted."""
    if not 0 <= k <= n_groups:
        raise DomainError(f"need 0 <= k <= {n_groups}, got k={k}")
    idx = rng.choice(n_groups, size=k, replace=False)
    idx.sort()
    return idx


def checkpoint_accept(cost_new: float, cost_checkpoint: float) -> bool:
    """True iff the new configuration is kept (ties keep the new one)."""
    if math.isnan(cost_new) or math.isnan(cost_checkpoint):
        raise NumericError(
            f"NaN cost in checkpoint comparison ({cost_new} vs {cost_checkpoint})"
        )
    return not cost_new > cost_checkpoint


# --------------------------------------------------------------------------
# The hierarchy runner
# --------------------------------------------------------------------------


class _BudgetExhausted(Exception):
    pass


class _HierarchyRun:
    def __init__(self, problem, schedule, budget, perturbation, seed):
        schedule.validate_for(problem.group_count)
        self.problem = problem
        self.schedule = schedule
        self.budget = budget
        self.perturbation = perturbation
        # Independent streams so subset picking, reinitialisation noise and
        # the inner optimiser never share draws: consuming more of one
        # stream cannot shift the others.
        ss = np.random.SeedSequence(seed)
        kids = ss.spawn(3)
        self.subset_rng = np.random.default_rng(kids[0])
        self.reinit_rng = np.random.default_rng(kids[1])
        self.backend_rng = np.random.default_rng(kids[2])
        self.pickers = [lv.make_picker() for lv in schedule.levels]

        self.evals = 0
        self.level0_calls = 0
        self.t0 = time.perf_counter()
        self.trace = RunTrace(seed=seed)
        self.best: Configuration | None = None

    # -- plumbing ----------------------------------------------------------

    def _elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def _check_budget(self) -> None:
        b = self.budget
        if b.max_level0_calls is not None and self.level0_calls >= b.max_level0_calls:
            raise _BudgetExhausted
        if b.max_cost_evaluations is not None and self.evals >= b.max_cost_evaluations:
            raise _BudgetExhausted
        if b.max_wall_seconds is not None and self._elapsed() >= b.max_wall_seconds:
            raise _BudgetExhausted

    def _cost(self, config: Configuration) -> float:
        if config.cached_cost is None:
            config.cached_cost = float(self.problem.cost(config.state))
            self.evals += 1
        if math.isnan(config.cached_cost):
            raise NumericError("backend returned NaN cost")
        return config.cached_cost

    def _snapshot(self, config: Configuration) -> Configuration:
        return Configuration(self.problem.copy_state(config.state), config.cached_cost)

    # -- the recursion -----------------------------------------------------

    def _level0(self, config: Configuration) -> None:
        self._check_budget()
        remaining = None
        if self.budget.max_cost_evaluations is not None:
            remaining = self.budget.max_cost_evaluations - self.evals
            if remaining <= 0:
                raise _BudgetExhausted
        res = self.problem.local_optimise(
            config.state, self.backend_rng, max_evals=remaining
        )
        config.state = res.state
        config.cached_cost = float(res.cost)
        self.evals += res.evals
        self.level0_calls += 1
        if math.isnan(config.cached_cost):
            raise NumericError("local optimiser returned NaN cost")
        if self.best is None or config.cached_cost < self.best.cached_cost:
            self.best = self._snapshot(config)
        self.trace.record(
            self.evals, self.level0_calls, self._elapsed(), self.best.cached_cost
        )

    def _descend(self, depth: int, config: Configuration) -> None:
        if depth == 0:
            self._level0(config)
            return
        level = self.schedule.levels[depth - 1]
        picker = self.pickers[depth - 1]
        done = 0
        while level.reinits is None or done < level.reinits:
            self._check_budget()
            cost_before = self._cost(config)
            checkpoint = self._snapshot(config)
            indices = picker.pick(self.problem.group_count, self.subset_rng)
            config.state = self.problem.reinit_groups(
                config.state, indices, self.perturbation, self.reinit_rng
            )
            config.cached_cost = None
            # On budget exhaustion the nested call unwinds past the revert;
            # the tracked best is kept separately, so nothing is lost.
            self._descend(depth - 1, config)
            if not checkpoint_accept(self._cost(config), cost_before):
                config.state = checkpoint.state
                config.cached_cost = checkpoint.cached_cost
            done += 1

    def run(self) -> RunTrace:
        config = Configuration(self.problem.full_init(self.backend_rng))
        self._cost(config)
        self.best = self._snapshot(config)
        try:
            self._descend(self.schedule.depth, config)
        except _BudgetExhausted:
            pass
        self.trace.final_best = self.best
        return self.trace


def run_hierarchy(
    problem,
    schedule: ReinitSchedule,
    budget: Budget,
    perturbation: PerturbationSpec | None = None,
    seed: int = 0,
) -> RunTrace:
    """Run the full hierarchy on ``problem`` until the budget is exhausted.

    The seed fully determines every random choice; two runs with the same
    arguments produce identical traces except for wall-clock stamps.
    """
    if perturbation is None:
        perturbation = PerturbationSpec()
    return _HierarchyRun(problem, schedule, budget, perturbation, seed).run()
