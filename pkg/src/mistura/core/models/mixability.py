import json
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from mistura.core.config import config
from mistura.core.models.entropy import DualEvalConfig
from mistura.core.models.simplex import ProbVector

EtaStatus = Literal["bracketed", "not_mixable", "lower_bound"]

# Slack allowed when checking that M samples do not increase with eta
SAMPLE_MONOTONICITY_TOLERANCE = 1e-6


class MixSearchConfig(BaseModel):
    """Grids, bracket and tolerances of the mixability-constant search."""

    coarse_resolution: int = Field(
        default_factory=lambda: config.coarse_resolution,
        ge=1,
        description="Resolution of expert predictions and mixtures in the first pass",
    )
    fine_resolution: int = Field(
        default_factory=lambda: config.fine_resolution,
        ge=1,
        description="Resolution of the local refinement windows",
    )
    action_resolution: Optional[int] = Field(
        default=None, description="Prediction grid resolution, None for the loss default"
    )
    regret_resolution: int = Field(
        default=200, ge=2, description="Mixture grid used for inf_mu sup_theta D(delta_theta, mu)"
    )
    pi_margin: Optional[float] = Field(
        default=None,
        description="Interior margin of the mixture grid, None for 0 or 1e-6 by entropy type",
    )
    refine_candidates: int = Field(
        default=3, ge=0, description="Coarse rows (per ranking) that receive a fine window"
    )
    window_budget: int = Field(
        default=5000, ge=1, description="Maximum number of rows in one refinement window"
    )
    zoom_levels: int = Field(default=10, ge=0, description="Best-response zoom levels")
    zoom_width: int = Field(default=5, ge=1, description="Zoom offsets per side and dimension")
    zoom_factor: float = Field(default=5.0, gt=1.0, description="Step shrink per zoom level")
    max_rows: int = Field(
        default=250_000, ge=1, description="Cap on coarse rows; resolution is lowered to fit"
    )
    chunk_rows: int = Field(default=2048, ge=1, description="Rows evaluated per batch")
    workers: Optional[int] = Field(
        default=None, description="Thread pool size for batch evaluation, None for sequential"
    )
    eta_lo: float = Field(default_factory=lambda: config.eta_lo, gt=0)
    eta_hi: float = Field(default_factory=lambda: config.eta_hi, gt=0)
    eta_tolerance: float = Field(default_factory=lambda: config.eta_tolerance, gt=0)
    mixable_tolerance: float = Field(
        default_factory=lambda: config.mixable_tolerance,
        ge=0,
        description="Band below zero still treated as M(eta) >= 0",
    )
    dual: DualEvalConfig = Field(default_factory=DualEvalConfig)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def validate_bracket(self):
        """Validate the eta bracket is ordered."""
        if self.eta_lo >= self.eta_hi:
            raise ValueError("eta_lo must be smaller than eta_hi")
        return self

    def metadata(self) -> Dict[str, object]:
        """Grid metadata echoed into reports."""
        return self.model_dump(exclude={"dual", "workers"}) | {"dual": self.dual.model_dump()}


class BestResponse(BaseModel):
    """The max-min witness prediction for one (A, mu)."""

    prediction: ProbVector
    slack: float = Field(..., description="min_x Mix_x - l_x(prediction)")
    mix: Tuple[float, ...] = Field(..., description="Mix bound for every outcome")

    def certifies(self, tolerance: float) -> bool:
        return self.slack >= -tolerance


class MEvaluation(BaseModel):
    """M(eta) together with the (A, pi) row attaining it."""

    eta: float
    value: float
    worst_predictions: Tuple[Tuple[float, ...], ...]
    worst_mixture: Tuple[float, ...]
    rows: int = Field(..., description="Number of (A, pi) rows evaluated")


class EtaSearchResult(BaseModel):
    """Outcome of the binary search for the zero crossing of M."""

    eta_star: float
    status: EtaStatus
    samples: List[Tuple[float, float]] = Field(default_factory=list)
    iterations: int = 0

    @property
    def is_mixable(self) -> bool:
        return self.eta_star > 0.0


class MixabilityReport(BaseModel):
    """Mixability constant and optimal regret of one (loss, entropy) pair."""

    loss: str
    entropy: str
    loss_spec: dict
    entropy_spec: dict
    experts: int
    eta_star: float
    status: EtaStatus
    samples: List[Tuple[float, float]] = Field(
        default_factory=list,
        description="(eta, M(eta)) pairs in evaluation order, non-increasing in eta",
    )
    regret: Optional[float] = Field(default=None, description="R = eta*^-1 inf_mu sup_theta D")
    regret_uniform: Optional[float] = Field(
        default=None, description="Bound at the uniform mixture"
    )
    regret_grid: Optional[float] = Field(default=None, description="Bound at the best grid mixture")
    regret_gap: Optional[float] = Field(
        default=None, description="Uniform bound minus the grid infimum"
    )
    grid: dict = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)
    seconds: float = 0.0

    @model_validator(mode="after")
    def validate_samples(self):
        """Validate M samples are non-increasing in eta."""
        ordered = sorted(self.samples)
        for (eta, value), (next_eta, next_value) in zip(ordered, ordered[1:]):
            if next_value > value + SAMPLE_MONOTONICITY_TOLERANCE:
                raise ValueError(
                    f"M samples must be non-increasing in eta: M({eta:g}) = {value:.3e} "
                    f"but M({next_eta:g}) = {next_value:.3e}"
                )
        return self

    @property
    def cell(self) -> str:
        """Table entry ``regret (eta*)`` at four significant figures."""
        if self.eta_star <= 0.0 or self.regret is None:
            return "—(0)"
        suffix = "+" if self.status == "lower_bound" else ""
        return f"{self.regret:.4g} ({self.eta_star:.4g}{suffix})"

    def to_dict(self) -> dict:
        data = self.model_dump()
        data["cell"] = self.cell
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "MixabilityReport":
        data = {k: v for k, v in data.items() if k != "cell"}
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class DominanceReport(BaseModel):
    """The Phi >=_l Psi comparison through optimal regret bounds."""

    loss: str
    phi: str
    psi: str
    regret_phi: float
    regret_psi: float
    uncertainty: float
    relation: Literal[">=", "<=", "="] = Field(
        ..., description="'>=' when Phi dominates Psi for the loss"
    )
