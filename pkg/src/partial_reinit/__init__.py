"""Hierarchical partial reinitialisation for local optimisers.

Instead of restarting a stuck optimiser from scratch, resample only a
subset of its variable groups and re-optimise, keeping the rest of what
previous runs learned; climb to larger subsets only when small ones stop
helping. The engine is generic over a small problem contract and ships
with k-means, k-medoids, HMM (Baum-Welch) and RBM (contrastive
divergence) backends, brute-force oracles for small instances, and a CLI
harness for seeded partial-vs-full comparisons.
"""

from .engine import (
    BernoulliMaskPicker,
    Budget,
    Configuration,
    Level,
    MLevelParams,
    PerturbationSpec,
    ReinitSchedule,
    RunTrace,
    UniformSubsetPicker,
    checkpoint_accept,
    full_schedule,
    perturb_value,
    pick_random_subset,
    required_reinits,
    run_hierarchy,
)
from .kernels import backend_name
from .problems import (
    BinaryDataset,
    CdConfig,
    DissimilarityMatrix,
    HmmModel,
    HmmProblem,
    KMeansProblem,
    KMeansState,
    KMedoidsProblem,
    LocalOptResult,
    MedoidState,
    ObsSeq,
    PointSet,
    ProblemBackend,
    RbmParams,
    RbmProblem,
    ResetPolicy,
)

__version__ = "0.1.0"

__all__ = [
    "BernoulliMaskPicker",
    "BinaryDataset",
    "Budget",
    "CdConfig",
    "Configuration",
    "DissimilarityMatrix",
    "HmmModel",
    "HmmProblem",
    "KMeansProblem",
    "KMeansState",
    "KMedoidsProblem",
    "Level",
    "LocalOptResult",
    "MLevelParams",
    "MedoidState",
    "ObsSeq",
    "PerturbationSpec",
    "PointSet",
    "ProblemBackend",
    "RbmParams",
    "RbmProblem",
    "ReinitSchedule",
    "ResetPolicy",
    "RunTrace",
    "UniformSubsetPicker",
    "backend_name",
    "checkpoint_accept",
    "full_schedule",
    "perturb_value",
    "pick_random_subset",
    "required_reinits",
    "run_hierarchy",
]
