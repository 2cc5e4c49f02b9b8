"""Simulation laboratory for Lüroth, Engel and Sylvester type expansions and their weighted laws."""
from .errors import (CappedTrajectoryError, ConfigurationError, ConsistencyError, DomainError,
                     HypothesisViolation, NumericError, OpplabError, WorkerError)
from .expansion import DigitSequence, expand, reconstruct
from .families import DistributionFamily
from .model import ModelSpec, delta, iid_model, preset, r_from_digits
from .rng import RngStreamKey
from .sampler import sample_batch, sample_digit, sample_trajectory

__version__ = "0.1.0"

__all__ = [
    "CappedTrajectoryError", "ConfigurationError", "ConsistencyError", "DigitSequence",
    "DistributionFamily", "DomainError", "HypothesisViolation", "ModelSpec", "NumericError",
    "OpplabError", "RngStreamKey", "WorkerError", "delta", "expand", "iid_model", "preset",
    "r_from_digits", "reconstruct", "sample_batch", "sample_digit", "sample_trajectory",
]
