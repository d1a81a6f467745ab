from pathlib import Path
from typing import Optional
from pydantic import BaseModel, Field, field_validator, model_validator


class MisturaConfig(BaseModel):
    """Numerical defaults shared by every Mistura component.

    This model loads configuration from environment variables and defaults.
    """

    # Simplex Configuration
    clamp_epsilon: float = Field(
        default=1e-9,
        description="Interior clamp applied before evaluating Legendre gradients",
    )
    log_loss_epsilon: float = Field(
        default=1e-12, description="Clamp applied to predictions before taking logs"
    )

    # Entropic Dual Solver Configuration
    dual_tolerance: float = Field(
        default=1e-9, description="Target accuracy of entropic dual evaluations"
    )
    dual_max_iterations: int = Field(
        default=200, description="Iteration cap for the multiplier bisection"
    )
    dual_fallback_grid: int = Field(
        default=400, description="Simplex grid resolution used to certify dual values"
    )

    # Action Space Configuration
    action_resolution_binary: int = Field(
        default=200, description="Prediction grid resolution for two outcomes"
    )
    action_resolution_ternary: int = Field(
        default=60, description="Prediction grid resolution for three or more outcomes"
    )

    # Mixability Search Configuration
    coarse_resolution: int = Field(
        default=25, description="Resolution of the first M(eta) grid pass"
    )
    fine_resolution: int = Field(
        default=200, description="Resolution of the local M(eta) refinement pass"
    )
    eta_lo: float = Field(default=1e-3, description="Lower end of the eta bracket")
    eta_hi: float = Field(default=1e3, description="Upper end of the eta bracket")
    eta_tolerance: float = Field(
        default=1e-3, description="Relative tolerance of the eta binary search"
    )
    mixable_tolerance: float = Field(
        default=1e-6, description="Band below zero still treated as M(eta) >= 0"
    )

    # Game Configuration
    violation_tolerance: float = Field(
        default=1e-6, description="Slack below which a GAA round is flagged"
    )
    bound_tolerance: float = Field(
        default=1e-5, description="Allowed excess over the constant-regret bound"
    )
    default_seed: int = Field(default=20240601, description="Seed for randomized runs")

    # Output Configuration
    output_dir: Path = Field(
        default=Path.home() / ".mistura" / "runs",
        description="Directory for CLI outputs when --out is not given",
    )
    env_file: Optional[Path] = Field(
        default=None, description="Optional .env file read by load_config_from_env"
    )

    @field_validator(
        "clamp_epsilon",
        "log_loss_epsilon",
        "dual_tolerance",
        "eta_lo",
        "eta_tolerance",
        "mixable_tolerance",
        "violation_tolerance",
        "bound_tolerance",
    )
    def validate_positive(cls, value):
        """Validate tolerances and bracket ends are positive."""
        if value <= 0:
            raise ValueError("Tolerances and eta bounds must be greater than 0")
        return value

    @field_validator(
        "dual_max_iterations",
        "dual_fallback_grid",
        "action_resolution_binary",
        "action_resolution_ternary",
        "coarse_resolution",
        "fine_resolution",
    )
    def validate_resolution(cls, value):
        """Validate grid resolutions and iteration caps."""
        if value < 2:
            raise ValueError("Resolutions and iteration caps must be at least 2")
        return value

    @model_validator(mode="after")
    def validate_bracket(self):
        """Validate the eta bracket is ordered."""
        if self.eta_lo >= self.eta_hi:
            raise ValueError("eta_lo must be smaller than eta_hi")
        return self

    def action_resolution(self, outcomes: int) -> int:
        """Prediction grid resolution for a given number of outcomes."""
        if outcomes <= 2:
            return self.action_resolution_binary
        return self.action_resolution_ternary

    model_config = {
        "env_prefix": "MISTURA_",
        "arbitrary_types_allowed": True,
        "validate_assignment": True,
    }


# Global config instance with default values
config = MisturaConfig()


def load_config_from_env(env_file: Optional[Path] = None) -> MisturaConfig:
    """Load configuration from environment variables.

    Variables may also come from a ``.env`` file, which never overrides
    variables already present in the process environment.

    Args:
        env_file: Optional path of a dotenv file to read first

    Returns:
        MisturaConfig: Configuration instance with values from environment
    """
    import os

    from dotenv import load_dotenv

    if env_file is not None:
        load_dotenv(env_file, override=False)

    env_settings = {}

    # Map environment variables to config fields
    for field_name, field in MisturaConfig.model_fields.items():
        env_var = f"MISTURA_{field_name.upper()}"
        if env_var not in os.environ:
            continue
        value = os.environ[env_var]

        # Handle type conversions
        if field.annotation in (Path, Optional[Path]):
            value = Path(value).expanduser()
        elif field.annotation is int:
            value = int(value)
        elif field.annotation is float:
            value = float(value)

        env_settings[field_name] = value

    if env_file is not None:
        env_settings.setdefault("env_file", Path(env_file))

    return MisturaConfig(**env_settings)


def apply_config(settings: MisturaConfig) -> None:
    """Copy a validated configuration onto the shared ``config`` instance.

    Models read their defaults from ``config`` lazily, so this changes the
    defaults of everything built afterwards.
    """
    # Already validated as a whole; field-by-field assignment could trip the
    # bracket check halfway through
    config.__dict__.update(settings.__dict__)
