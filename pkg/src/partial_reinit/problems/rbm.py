"""Restricted Boltzmann machine training as a problem backend.

Training runs contrastive-divergence (CD-k) stochastic gradient ascent; the
cost reported to the engine is the negated exact log-likelihood objective,
evaluated by marginalising the hidden layer in closed form and enumerating
the 2^n_v visible configurations for the partition function. That keeps the
backend honest at the small scales it is meant for; beyond the guard it
refuses rather than substituting a proxy.

A variable group is a single scalar parameter, flattened as W row-major,
then a, then b. The matching subset heuristic is the Bernoulli mask: each
scalar is reset with a fixed probability, so resets keep most of what
training has learned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from ..engine import BernoulliMaskPicker, Level, PerturbationSpec, ReinitSchedule
from ..errors import ConfigurationError, DomainError, NumericError
from ..kernels import rbm_cd_epoch, rbm_cd_run
from .base import LocalOptResult, ProblemBackend

EXACT_VISIBLE_LIMIT = 20


@dataclass
class RbmParams:
    """Weight matrix W (n_v x n_h) and bias vectors a (visible), b (hidden)."""

    W: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.W = np.ascontiguousarray(self.W, dtype=np.float64)
        self.a = np.ascontiguousarray(self.a, dtype=np.float64)
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)

    @property
    def n_visible(self) -> int:
        return self.W.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.W.shape[1]

    @property
    def n_params(self) -> int:
        return self.W.size + self.a.size + self.b.size

    def copy(self) -> "RbmParams":
        return RbmParams(self.W.copy(), self.a.copy(), self.b.copy())

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.W.ravel(), self.a, self.b])

    @classmethod
    def from_flat(cls, flat: np.ndarray, n_visible: int, n_hidden: int) -> "RbmParams":
        w_end = n_visible * n_hidden
        return cls(
            flat[:w_end].reshape(n_visible, n_hidden),
            flat[w_end : w_end + n_visible],
            flat[w_end + n_visible :],
        )


@dataclass(frozen=True)
class BinaryDataset:
    """Immutable matrix of {0,1} samples, one per row."""

    samples: np.ndarray

    def __init__(self, samples):
        arr = np.ascontiguousarray(samples, dtype=np.float64)
        if arr.ndim != 2 or arr.size == 0:
            raise ConfigurationError("dataset must be a non-empty 2-d array")
        if not np.isin(arr, (0.0, 1.0)).all():
            raise ConfigurationError("dataset entries must be 0 or 1")
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_visible(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class CdConfig:
    """Contrastive-divergence training hyper-parameters."""

    gibbs_k: int = 1
    learning_rate: float = 0.01
    epochs: int = 1000
    lam: float = 0.0

    def __post_init__(self):
        if self.gibbs_k < 1 or self.epochs < 1:
            raise ConfigurationError("gibbs_k and epochs must be >= 1")
        if self.learning_rate <= 0.0 or self.lam < 0.0:
            raise ConfigurationError("need learning_rate > 0 and lam >= 0")


@dataclass(frozen=True)
class ResetPolicy:
    """Bernoulli reset probability and the sigma of fresh Gaussian draws."""

    reset_prob: float = 0.1
    init_sigma: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.reset_prob <= 1.0:
            raise ConfigurationError(f"reset_prob must be in [0, 1], got {self.reset_prob}")
        if self.init_sigma <= 0.0:
            raise ConfigurationError(f"init_sigma must be > 0, got {self.init_sigma}")


def gen_training_data(
    n_visible: int, n_samples: int, noise_prob: float, rng: np.random.Generator
) -> BinaryDataset:
    """Samples drawn uniformly from four patterns, then bit-flip noise.

    The patterns are a half-on block, an alternating string starting with 1,
    and their bitwise negations.
    """
    if n_visible < 2:
        raise DomainError("need at least two visible units")
    x1 = np.zeros(n_visible)
    x1[: n_visible // 2] = 1.0
    x2 = np.array([(j + 1) % 2 for j in range(n_visible)], dtype=np.float64)
    patterns = np.stack([x1, x2, 1.0 - x1, 1.0 - x2])
    choice = rng.integers(4, size=n_samples)
    samples = patterns[choice]
    flips = rng.random(samples.shape) < noise_prob
    samples = np.abs(samples - flips)
    return BinaryDataset(samples)


def _check_exact_scale(n_visible: int) -> None:
    if n_visible > EXACT_VISIBLE_LIMIT:
        raise DomainError(
            f"exact objective needs n_visible <= {EXACT_VISIBLE_LIMIT} "
            f"(got {n_visible}); use CD-only training at larger scales"
        )


def _all_bit_vectors(n: int) -> np.ndarray:
    """All 2^n binary vectors, row i = bits of i, most significant first."""
    ints = np.arange(2**n, dtype=np.int64)
    return ((ints[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(np.float64)


def _log_unnormalised(v: np.ndarray, params: RbmParams) -> np.ndarray:
    """ln sum_h exp(-E(v, h)) per row of v, hidden layer marginalised."""
    return v @ params.a + np.logaddexp(0.0, params.b + v @ params.W).sum(axis=1)


def exact_objective(params: RbmParams, data: BinaryDataset, lam: float) -> float:
    """Mean log-probability of the data minus (lam/2) * sum(W^2).

    Exact: the hidden layer is marginalised in closed form and the partition
    function is summed over all visible configurations.
    """
    _check_exact_scale(params.n_visible)
    if data.n_visible != params.n_visible:
        raise ConfigurationError("data width does not match n_visible")
    log_z = logsumexp(_log_unnormalised(_all_bit_vectors(params.n_visible), params))
    mean_ll = _log_unnormalised(data.samples, params).mean() - log_z
    return float(mean_ll - 0.5 * lam * (params.W**2).sum())


def exact_gradient(params: RbmParams, data: BinaryDataset, lam: float) -> RbmParams:
    """Exact gradient of the objective, same shapes as the parameters.

    Data terms clamp the visible units to the samples; model terms weight
    every visible configuration by its exact probability.
    """
    _check_exact_scale(params.n_visible)
    ph_data = expit(params.b + data.samples @ params.W)
    v_all = _all_bit_vectors(params.n_visible)
    logp = _log_unnormalised(v_all, params)
    p_v = np.exp(logp - logsumexp(logp))
    ph_all = expit(params.b + v_all @ params.W)
    gw = (
        data.samples.T @ ph_data / data.n_samples
        - (v_all * p_v[:, None]).T @ ph_all
        - lam * params.W
    )
    ga = data.samples.mean(axis=0) - p_v @ v_all
    gb = ph_data.mean(axis=0) - p_v @ ph_all
    return RbmParams(gw, ga, gb)


def cd_gradient(
    params: RbmParams,
    batch: BinaryDataset,
    gibbs_k: int,
    lam: float,
    rng: np.random.Generator,
) -> RbmParams:
    """CD-k stochastic estimate of the objective gradient."""
    gw, ga, gb = rbm_cd_epoch(
        params.W, params.a, params.b, batch.samples, gibbs_k, lam, rng
    )
    return RbmParams(gw, ga, gb)


class RbmProblem(ProblemBackend):
    """Negated exact-objective minimisation with CD-trained local optima."""

    def __init__(
        self,
        data: BinaryDataset,
        n_hidden: int,
        cd: CdConfig | None = None,
        reset: ResetPolicy | None = None,
    ):
        if n_hidden < 1:
            raise ConfigurationError("need at least one hidden unit")
        _check_exact_scale(data.n_visible)
        self.data = data
        self.n_visible = data.n_visible
        self.n_hidden = n_hidden
        self.cd = cd or CdConfig()
        self.reset = reset or ResetPolicy()

    @property
    def group_count(self) -> int:
        return self.n_visible * self.n_hidden + self.n_visible + self.n_hidden

    def cost(self, state: RbmParams) -> float:
        return -exact_objective(state, self.data, self.cd.lam)

    def full_init(self, rng) -> RbmParams:
        flat = rng.normal(0.0, self.reset.init_sigma, size=self.group_count)
        return RbmParams.from_flat(flat, self.n_visible, self.n_hidden)

    def local_optimise(self, state, rng, max_evals=None) -> LocalOptResult:
        st = state.copy()
        epochs = self.cd.epochs
        if max_evals is not None:
            # The post-training objective evaluation costs one unit too.
            epochs = min(epochs, max(max_evals - 1, 0))
        rbm_cd_run(
            st.W,
            st.a,
            st.b,
            self.data.samples,
            self.cd.gibbs_k,
            self.cd.learning_rate,
            self.cd.lam,
            epochs,
            rng.bit_generator,
        )
        if not (
            np.isfinite(st.W).all() and np.isfinite(st.a).all() and np.isfinite(st.b).all()
        ):
            raise NumericError("CD training produced non-finite parameters")
        cost = -exact_objective(st, self.data, self.cd.lam)
        return LocalOptResult(st, cost, epochs + 1, True)

    def reinit_groups(self, state, indices, perturbation: PerturbationSpec, rng):
        """Redraw the named scalars from N(0, init_sigma).

        With alpha > 0 the fresh draw is blended with the old value; the
        benchmarks use alpha = 0 (plain redraw).
        """
        out = state.copy()
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            return out
        flat = out.to_flat()
        fresh = rng.normal(0.0, self.reset.init_sigma, size=idx.size)
        alpha = perturbation.alpha
        flat[idx] = alpha * flat[idx] + (1.0 - alpha) * fresh
        return RbmParams.from_flat(flat, self.n_visible, self.n_hidden)

    def partial_schedule(self) -> ReinitSchedule:
        """Single Bernoulli-mask level using this problem's reset policy."""
        return ReinitSchedule(
            [
                Level(
                    k=self.group_count,
                    reinits=None,
                    picker=BernoulliMaskPicker(self.reset.reset_prob),
                )
            ]
        )

    def copy_state(self, state: RbmParams) -> RbmParams:
        return state.copy()
