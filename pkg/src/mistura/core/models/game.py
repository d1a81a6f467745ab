import json
import math
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from mistura.core.config import config
from mistura.core.models.entropy import EntropySpec
from mistura.core.models.loss import LossSpec
from mistura.core.models.simplex import ProbVector

Scenario = Literal["iid_random", "one_good_expert", "greedy_adversary"]


class Prediction(BaseModel):
    """The player's prediction for one round and how well it meets the Mix bound."""

    prediction: ProbVector
    slack: float = Field(..., description="min_x Mix_x - l_x(prediction)")
    mix: Tuple[float, ...] = Field(..., description="Mix bound for every outcome")
    flagged: bool = Field(default=False, description="Slack below minus the violation tolerance")


class GaaSnapshot(BaseModel):
    """Serializable state of the generalized aggregating algorithm."""

    entropy: EntropySpec
    mu: Tuple[float, ...]
    w: Tuple[float, ...]
    t: int

    def to_dict(self) -> dict:
        return {
            "entropy": self.entropy.to_dict(),
            "mu": list(self.mu),
            "w": list(self.w),
            "t": self.t,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaaSnapshot":
        return cls(
            entropy=EntropySpec.from_dict(data["entropy"]),
            mu=tuple(data["mu"]),
            w=tuple(data["w"]),
            t=data["t"],
        )


class GameConfig(BaseModel):
    """One prediction-with-expert-advice game."""

    name: Optional[str] = Field(default=None, description="Label used in traces and events")
    experts: int = Field(..., ge=1, description="Number of experts K")
    outcomes: int = Field(default=2, ge=2, description="Number of outcomes |X|")
    rounds: int = Field(..., ge=1, description="Number of rounds T")
    loss: LossSpec
    entropy: EntropySpec
    prior: Optional[ProbVector] = Field(
        default=None, description="Initial mixture mu^0, None for uniform"
    )
    scenario: Scenario = "iid_random"
    seed: int = Field(default_factory=lambda: config.default_seed)
    correlation: float = Field(
        default=0.8, ge=0.0, le=1.0, description="Weight of the outcome in the good expert"
    )
    adversary_candidates: int = Field(
        default=16, ge=1, description="Expert sets tried per round by the greedy adversary"
    )
    violation_tolerance: float = Field(
        default_factory=lambda: config.violation_tolerance,
        ge=0,
        description="Slack below minus this value flags a round",
    )
    cross_check: bool = Field(
        default=False, description="Verify every update against the direct argmin"
    )

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="before")
    @classmethod
    def fill_outcomes(cls, data: Any):
        """Give a loss without an explicit outcome count the game's |X|."""
        if isinstance(data, dict) and isinstance(data.get("loss"), dict):
            loss = dict(data["loss"])
            loss.setdefault("outcomes", data.get("outcomes", 2))
            data = dict(data, loss=loss)
        return data

    @field_validator("prior", mode="before")
    @classmethod
    def parse_prior(cls, value):
        """Accept a bare list of weights."""
        if isinstance(value, (list, tuple)):
            return ProbVector(weights=tuple(value))
        return value

    @model_validator(mode="after")
    def validate_dimensions(self):
        """Validate loss, entropy and prior agree with the game size."""
        if self.loss.outcomes != self.outcomes:
            raise ValueError(
                f"loss has {self.loss.outcomes} outcomes but the game has {self.outcomes}"
            )
        if self.entropy.dim is not None and self.entropy.dim != self.experts:
            raise ValueError(f"entropy lives on a {self.entropy.dim}-simplex, not {self.experts}")
        if self.prior is not None and self.prior.dim != self.experts:
            raise ValueError(f"prior has {self.prior.dim} weights for {self.experts} experts")
        return self

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        parts = (self.scenario, self.loss.label, self.entropy.label)
        return "-".join(parts + (f"K{self.experts}", f"s{self.seed}"))

    def to_dict(self) -> dict:
        data = self.model_dump(exclude={"loss", "entropy", "prior"})
        data["loss"] = self.loss.to_dict()
        data["entropy"] = self.entropy.to_dict()
        data["prior"] = list(self.prior.weights) if self.prior is not None else None
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "GameConfig":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class RoundRecord(BaseModel):
    """Everything observed and played in one round."""

    round: int
    predictions: Tuple[Tuple[float, ...], ...] = Field(..., description="A^t, one row per expert")
    mixture: Tuple[float, ...] = Field(..., description="mu^{t-1} used to predict")
    prediction: Tuple[float, ...] = Field(..., description="Player prediction p^t")
    outcome: int
    player_loss: float
    expert_losses: Tuple[float, ...]
    slack: float
    flagged: bool = False

    def to_row(self) -> dict:
        """Flat CSV row."""
        row = {
            "round": self.round,
            "outcome": self.outcome,
            "player_loss": self.player_loss,
            "slack": self.slack,
            "flagged": int(self.flagged),
            "prediction": " ".join(f"{v:.17g}" for v in self.prediction),
            "mixture": " ".join(f"{v:.17g}" for v in self.mixture),
        }
        for theta, (a, loss) in enumerate(zip(self.predictions, self.expert_losses)):
            row[f"expert_{theta}"] = " ".join(f"{v:.17g}" for v in a)
            row[f"expert_{theta}_loss"] = loss
        return row


class GameTrace(BaseModel):
    """Full record of a game with cumulative losses and the constant-regret bound."""

    config: GameConfig
    records: List[RoundRecord] = Field(default_factory=list)
    player_loss: float = 0.0
    expert_losses: Tuple[float, ...] = ()
    bound: Tuple[float, ...] = Field(
        default=(), description="D_Phi(delta_theta, mu^0) for every expert"
    )
    completed: bool = False
    error: Optional[str] = None
    seconds: float = 0.0

    @property
    def rounds_played(self) -> int:
        return len(self.records)

    @property
    def regret(self) -> float:
        """L^T - min_theta L^T_theta."""
        if not self.expert_losses:
            return 0.0
        return self.player_loss - min(self.expert_losses)

    @property
    def flagged_rounds(self) -> List[int]:
        return [r.round for r in self.records if r.flagged]

    def bound_slack(self) -> Tuple[float, ...]:
        """L^T_theta + D_Phi(delta_theta, mu^0) - L^T for every expert."""
        return tuple(
            loss + b - self.player_loss for loss, b in zip(self.expert_losses, self.bound)
        )

    def min_slack(self) -> float:
        slack = self.bound_slack()
        return min(slack) if slack else math.inf

    def bound_holds(self, tolerance: Optional[float] = None) -> bool:
        tolerance = config.bound_tolerance if tolerance is None else tolerance
        return self.min_slack() >= -tolerance

    def certified(self, tolerance: Optional[float] = None) -> bool:
        """Completed, no flagged round, and the bound holds for every expert."""
        return self.completed and not self.flagged_rounds and self.bound_holds(tolerance)

    def to_rows(self) -> List[dict]:
        return [record.to_row() for record in self.records]

    def summary(self, tolerance: Optional[float] = None) -> Dict[str, Any]:
        return {
            "game": self.config.label,
            "rounds": self.rounds_played,
            "completed": self.completed,
            "player_loss": self.player_loss,
            "expert_losses": list(self.expert_losses),
            "regret": self.regret,
            "bound": list(self.bound),
            "bound_slack": list(self.bound_slack()),
            "flagged_rounds": self.flagged_rounds,
            "certified": self.certified(tolerance),
            "error": self.error,
            "seconds": self.seconds,
        }

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "records": [record.model_dump() for record in self.records],
            "player_loss": self.player_loss,
            "expert_losses": list(self.expert_losses),
            "bound": list(self.bound),
            "completed": self.completed,
            "error": self.error,
            "seconds": self.seconds,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameTrace":
        data = dict(data)
        data["config"] = GameConfig.from_dict(data["config"])
        data["records"] = [RoundRecord(**r) for r in data.get("records", [])]
        return cls(**data)


class CertificationReport(BaseModel):
    """Constant-regret certification of a batch of games."""

    games: int
    certified: int
    tolerance: float
    min_slack: float = Field(..., description="Smallest bound slack over all games and experts")
    max_regret: float
    flagged_rounds: int = Field(..., description="Flagged rounds summed over the batch")
    failures: List[int] = Field(default_factory=list, description="Indices of failed games")
    summaries: List[Dict[str, Any]] = Field(default_factory=list)

    @property
    def all_certified(self) -> bool:
        return self.certified == self.games

    @property
    def certified_fraction(self) -> float:
        return self.certified / self.games if self.games else 1.0

    def to_dict(self) -> dict:
        data = self.model_dump()
        data["all_certified"] = self.all_certified
        return data
