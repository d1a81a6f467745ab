import math
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

SUM_TOLERANCE = 1e-12


class ProbVector(BaseModel):
    """A point on a probability simplex.

    Used for expert mixtures over Theta as well as for predictions and
    outcome distributions over X.
    """

    weights: Tuple[float, ...] = Field(..., description="Nonnegative weights summing to 1")

    model_config = {"frozen": True}

    @field_validator("weights")
    def validate_weights(cls, value):
        """Validate the weights form a probability vector."""
        if len(value) < 1:
            raise ValueError("A probability vector needs at least one coordinate")
        if any(not math.isfinite(w) or w < 0.0 for w in value):
            raise ValueError("Probability weights must be finite and nonnegative")
        if abs(math.fsum(value) - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"Probability weights sum to {math.fsum(value)!r}, not 1")
        return value

    @property
    def dim(self) -> int:
        return len(self.weights)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def is_interior(self) -> bool:
        return min(self.weights) > 0.0

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "ProbVector":
        """Build a vector from raw weights, dropping round-off negatives and renormalizing."""
        arr = np.clip(np.asarray(values, dtype=float), 0.0, None)
        total = arr.sum()
        if not np.isfinite(total) or total <= 0.0:
            raise ValueError("Cannot normalize a vector without positive mass")
        return cls(weights=tuple(float(w) for w in arr / total))

    def to_dict(self) -> dict:
        return {"weights": list(self.weights)}

    @classmethod
    def from_dict(cls, data: dict) -> "ProbVector":
        return cls(weights=tuple(data["weights"]))


class DualVector(BaseModel):
    """An element of the dual space of a simplex (gradients, loss vectors)."""

    values: Tuple[float, ...] = Field(..., description="Dual coordinates")

    model_config = {"frozen": True}

    @field_validator("values")
    def validate_values(cls, value):
        """Validate there are no NaN coordinates; infinities mark boundary gradients."""
        if any(math.isnan(v) for v in value):
            raise ValueError("Dual vectors cannot contain NaN")
        return value

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.values)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "DualVector":
        return cls(values=tuple(float(v) for v in np.asarray(values, dtype=float)))

    def to_dict(self) -> dict:
        return {"values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "DualVector":
        return cls(values=tuple(data["values"]))
