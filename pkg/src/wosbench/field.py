"""Masked scalar grids over the fixed [-1,1]^2 evaluation square."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EXTENT = (-1.0, 1.0)


class ShapeMismatch(ValueError):
    pass


class EmptyMask(ValueError):
    pass


class NonFiniteGroundTruth(ValueError):
    pass


@dataclass
class Field:
    """float32 values with a {0,1} mask; values are exactly 0 off-mask."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        self.mask = np.asarray(self.mask, dtype=np.float32)
        if self.values.shape != self.mask.shape:
            raise ShapeMismatch(f"{self.values.shape} vs {self.mask.shape}")

    @staticmethod
    def from_values(values, mask) -> "Field":
        """Zero off-mask values and validate in-mask finiteness."""
        mask = np.asarray(mask, dtype=np.float32)
        values = np.asarray(values, dtype=np.float32) * mask
        if not np.all(np.isfinite(values[mask > 0])):
            raise NonFiniteGroundTruth("non-finite value inside the mask")
        return Field(values, mask)

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    def n_masked(self) -> int:
        return int(np.sum(self.mask > 0))

    def masked_values(self) -> np.ndarray:
        return self.values[self.mask > 0]
