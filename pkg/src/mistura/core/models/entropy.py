import json
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from mistura.core.config import config

EntropyKind = Literal["shannon", "quadratic", "tsallis", "renyi"]


class EntropySpec(BaseModel):
    """A convex entropy on the simplex, scaled as Phi / eta.

    Serialized as ``{"kind": "tsallis", "alpha": -0.5, "eta": 1.0}``.
    """

    kind: EntropyKind = Field(..., description="Entropy family")
    alpha: Optional[float] = Field(
        default=None, description="Order of the Tsallis or Renyi family"
    )
    eta: float = Field(default=1.0, gt=0, description="Scale; the entropy is Phi / eta")
    dim: Optional[int] = Field(
        default=None, description="Simplex dimension, None when used at any dimension"
    )

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("dim")
    def validate_dim(cls, value):
        """Validate the simplex dimension when one is pinned."""
        if value is not None and value < 1:
            raise ValueError("Entropy dimension must be positive")
        return value

    @model_validator(mode="after")
    def validate_alpha(self):
        """Validate the order parameter against the family's admissible range."""
        if self.kind in ("shannon", "quadratic"):
            if self.alpha is not None:
                raise ValueError(f"{self.kind} entropy takes no alpha")
        elif self.alpha is None:
            raise ValueError(f"{self.kind} entropy requires alpha")
        elif self.kind == "tsallis" and not (-1.0 < self.alpha < 0.0 or self.alpha > 0.0):
            raise ValueError("Tsallis entropy requires alpha in (-1, 0) or (0, inf)")
        elif self.kind == "renyi" and not -1.0 < self.alpha < 0.0:
            raise ValueError("Renyi entropy requires alpha in (-1, 0)")
        return self

    @property
    def is_legendre(self) -> bool:
        """Whether the gradient diverges at the simplex boundary."""
        if self.kind == "quadratic":
            return False
        if self.kind == "tsallis":
            return self.alpha < 0.0
        return True

    @property
    def label(self) -> str:
        """Short display name, e.g. ``H``, ``S_-0.5`` or ``Q/2``."""
        if self.kind == "shannon":
            base = "H"
        elif self.kind == "quadratic":
            base = "Q"
        else:
            base = f"{'S' if self.kind == 'tsallis' else 'R'}_{self.alpha:g}"
        if self.eta != 1.0:
            base = f"{base}/{self.eta:g}"
        return base

    def scaled(self, eta: float) -> "EntropySpec":
        """The entropy (Phi / self.eta) / eta."""
        return self.model_copy(update={"eta": self.eta * eta})

    def multiplied(self, factor: float) -> "EntropySpec":
        """The entropy factor * Phi."""
        return self.model_copy(update={"eta": self.eta / factor})

    def with_dim(self, dim: int) -> "EntropySpec":
        return self.model_copy(update={"dim": dim})

    def to_dict(self) -> dict:
        data = {"kind": self.kind}
        if self.alpha is not None:
            data["alpha"] = self.alpha
        data["eta"] = self.eta
        if self.dim is not None:
            data["dim"] = self.dim
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "EntropySpec":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "EntropySpec":
        return cls.from_dict(json.loads(text))


class DualEvalConfig(BaseModel):
    """Accuracy settings of the entropic dual solver."""

    tolerance: float = Field(
        default_factory=lambda: config.dual_tolerance, gt=0, description="Target accuracy"
    )
    max_iterations: int = Field(
        default_factory=lambda: config.dual_max_iterations,
        ge=1,
        description="Iteration cap of the multiplier search",
    )
    fallback_grid_resolution: int = Field(
        default_factory=lambda: config.dual_fallback_grid,
        ge=2,
        description="Grid resolution used to certify dual values",
    )

    model_config = {"frozen": True}


class LegendreProbeReport(BaseModel):
    """Empirical evidence for the Legendre property of an entropy."""

    entropy: str
    strictly_convex: bool
    boundary_gradient_unbounded: bool
    max_gradient_norm: float = Field(..., description="Largest gradient norm on the boundary path")
    convexity_violations: int = 0

    @property
    def is_legendre(self) -> bool:
        return self.strictly_convex and self.boundary_gradient_unbounded


class DualValidationReport(BaseModel):
    """Agreement of the exact dual solver with independent references."""

    entropy: str
    samples: int
    seed: int
    max_reference_error: float = Field(
        ..., description="Max |exact - reference| where the reference is closed form or generic"
    )
    max_grid_shortfall: float = Field(
        ..., description="Max amount by which a grid point beats the solver value"
    )
    reference: str = Field(..., description="Name of the reference used")
