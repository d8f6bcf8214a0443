"""Problem backends fulfilling the engine's reinitialisation contract."""

from .base import LocalOptResult, ProblemBackend
from .hmm import HmmModel, HmmProblem, ObsSeq
from .kmeans import KMeansProblem, KMeansState, PointSet
from .kmedoids import DissimilarityMatrix, KMedoidsProblem, MedoidState
from .rbm import BinaryDataset, CdConfig, RbmParams, RbmProblem, ResetPolicy

__all__ = [
    "BinaryDataset",
    "CdConfig",
    "DissimilarityMatrix",
    "HmmModel",
    "HmmProblem",
    "KMeansProblem",
    "KMeansState",
    "KMedoidsProblem",
    "LocalOptResult",
    "MedoidState",
    "ObsSeq",
    "PointSet",
    "ProblemBackend",
    "RbmParams",
    "RbmProblem",
    "ResetPolicy",
]
