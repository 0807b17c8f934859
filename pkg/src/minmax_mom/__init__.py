"""Minmax median-of-means estimators for linear models under Lipschitz losses."""

from .estimators import MOMClassifier, MOMRegressor
from .exceptions import DomainError, MomError, NumericError, SelectionError, SolverError
from .losses import LossFamily, LossSpec, parse_loss
from .mom import BlockPartition, MomValue, mom, mom_increment, partition
from .solver import FitResult, SolverConfig, erm_fit, mom_fit

__version__ = "0.1.0"

__all__ = [
    "BlockPartition",
    "DomainError",
    "FitResult",
    "LossFamily",
    "LossSpec",
    "MOMClassifier",
    "MOMRegressor",
    "MomError",
    "MomValue",
    "NumericError",
    "SelectionError",
    "SolverConfig",
    "SolverError",
    "erm_fit",
    "mom",
    "mom_fit",
    "mom_increment",
    "parse_loss",
    "partition",
]
