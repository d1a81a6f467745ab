import json
from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from mistura.core.config import config
from mistura.core.models.entropy import EntropySpec
from mistura.core.models.simplex import ProbVector

LossKind = Literal["log", "squared", "proper", "linear", "constant"]


class LossSpec(BaseModel):
    """A loss over predictions in the outcome simplex.

    ``proper`` builds the proper loss of an entropy F; ``linear`` (l(a) = -a)
    is an improper diagnostic loss and ``constant`` charges ``level`` for
    every outcome whatever the prediction.
    """

    kind: LossKind = Field(..., description="Loss family")
    entropy: Optional[EntropySpec] = Field(
        default=None, description="Entropy F of a proper loss"
    )
    outcomes: int = Field(default=2, ge=1, description="Number of outcomes |X|")
    resolution: Optional[int] = Field(
        default=None, description="Action grid resolution, None for the configured default"
    )
    level: float = Field(default=0.0, description="Loss value of the constant loss")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("resolution")
    def validate_resolution(cls, value):
        """Validate the action grid resolution."""
        if value is not None and value < 2:
            raise ValueError("Action grid resolution must be at least 2")
        return value

    @model_validator(mode="after")
    def validate_entropy(self):
        """Validate only proper losses carry an entropy of matching dimension."""
        if self.kind == "proper":
            if self.entropy is None:
                raise ValueError("proper losses require an entropy")
            if self.entropy.dim is not None and self.entropy.dim != self.outcomes:
                raise ValueError("the entropy of a proper loss must live on the outcome simplex")
        elif self.entropy is not None:
            raise ValueError(f"{self.kind} loss takes no entropy")
        return self

    @property
    def action_resolution(self) -> int:
        if self.resolution is not None:
            return self.resolution
        return config.action_resolution(self.outcomes)

    @property
    def is_proper(self) -> bool:
        return self.kind in ("log", "squared", "proper")

    @property
    def label(self) -> str:
        if self.kind == "proper":
            return f"proper[{self.entropy.label}]"
        if self.kind == "constant":
            return f"constant[{self.level:g}]"
        return self.kind

    def with_outcomes(self, outcomes: int) -> "LossSpec":
        return self.model_copy(update={"outcomes": outcomes})

    def to_dict(self) -> dict:
        data = {"kind": self.kind}
        if self.entropy is not None:
            data["entropy"] = self.entropy.to_dict()
        if self.kind == "constant":
            data["level"] = self.level
        data["outcomes"] = self.outcomes
        if self.resolution is not None:
            data["resolution"] = self.resolution
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "LossSpec":
        data = dict(data)
        if isinstance(data.get("entropy"), dict):
            data["entropy"] = EntropySpec.from_dict(data["entropy"])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "LossSpec":
        return cls.from_dict(json.loads(text))


class ExpertPredictionSet(BaseModel):
    """One prediction A_theta in the outcome simplex per expert."""

    predictions: Tuple[ProbVector, ...] = Field(..., description="Expert predictions")

    model_config = {"frozen": True}

    @field_validator("predictions")
    def validate_predictions(cls, value):
        """Validate there is at least one expert and all predictions share a simplex."""
        if len(value) < 1:
            raise ValueError("At least one expert prediction is required")
        if len({p.dim for p in value}) != 1:
            raise ValueError("Expert predictions must share the outcome simplex")
        return value

    @property
    def experts(self) -> int:
        return len(self.predictions)

    @property
    def outcomes(self) -> int:
        return self.predictions[0].dim

    def as_array(self) -> np.ndarray:
        """Predictions as a (K, |X|) array."""
        return np.array([p.weights for p in self.predictions], dtype=float)

    @classmethod
    def from_array(cls, rows) -> "ExpertPredictionSet":
        return cls(predictions=tuple(ProbVector.from_array(row) for row in np.atleast_2d(rows)))

    def to_dict(self) -> dict:
        return {"predictions": [list(p.weights) for p in self.predictions]}

    @classmethod
    def from_dict(cls, data: dict) -> "ExpertPredictionSet":
        return cls(predictions=tuple(ProbVector(weights=tuple(p)) for p in data["predictions"]))


class LossMatrix(BaseModel):
    """Loss values l_x(A_theta) with shape (|X|, K)."""

    entries: Tuple[Tuple[float, ...], ...] = Field(..., description="Rows indexed by outcome")

    model_config = {"frozen": True}

    @field_validator("entries")
    def validate_entries(cls, value):
        """Validate the matrix is rectangular and finite."""
        if len({len(row) for row in value}) > 1:
            raise ValueError("Loss matrix rows must have equal length")
        if not np.all(np.isfinite(np.asarray(value, dtype=float))):
            raise ValueError("Loss matrix entries must be finite")
        return value

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    def row(self, x: int) -> np.ndarray:
        """Loss vector l_x(A) over experts."""
        return np.asarray(self.entries[x], dtype=float)


class ProprietyReport(BaseModel):
    """Outcome of the grid propriety check of a loss."""

    loss: str
    samples: int
    seed: int
    resolution: int
    violations: int
    max_violation: float = Field(..., description="Largest distance beyond one grid cell")


class QuasiconvexityReport(BaseModel):
    """Outcome of sampled chord checks of p -> <p, l(q)>."""

    loss: str
    trials: int
    seed: int
    violations: int
    max_excess: float = Field(..., description="Largest excess over the chord maximum")
