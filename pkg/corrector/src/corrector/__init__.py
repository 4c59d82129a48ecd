"""Learned single-pass corrector for finite-budget Monte Carlo estimates.

Consumes datasets produced by the `wosbench` CLI purely through their
file formats (JSONL case records, NPZ bundles); demonstrates that
low-budget Walk-on-Spheres error is structured and correctable in one
forward pass.
"""

__version__ = "0.1.0"

from .data import BundleDataset, CaseRef, DataTooSmall, read_cases, solved_cases
from .infer import ShapeMismatch, correct, empirical_variance_ratio
from .model import ResidualUNet
from .train import TrainConfig, evaluate, load_model, train

__all__ = [
    "BundleDataset", "CaseRef", "DataTooSmall", "read_cases", "solved_cases",
    "ShapeMismatch", "correct", "empirical_variance_ratio", "ResidualUNet",
    "TrainConfig", "evaluate", "load_model", "train", "__version__",
]
