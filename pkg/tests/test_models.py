"""
Tests for the pydantic data models.
"""
import json

import pytest
from pydantic import ValidationError

from mistura.core.models import (
    EntropySpec,
    GameConfig,
    LossSpec,
    MixabilityReport,
    MixSearchConfig,
    ProbVector,
    RunManifest,
)


def make_report(**overrides) -> MixabilityReport:
    data = {
        "loss": "log",
        "entropy": "H",
        "loss_spec": {"kind": "log", "outcomes": 2},
        "entropy_spec": {"kind": "shannon", "eta": 1.0},
        "experts": 2,
        "eta_star": 1.0,
        "status": "bracketed",
        "regret": 0.693147,
    }
    data.update(overrides)
    return MixabilityReport(**data)


def test_entropy_spec_validation():
    with pytest.raises(ValidationError):
        EntropySpec(kind="shannon", alpha=-0.5)
    with pytest.raises(ValidationError):
        EntropySpec(kind="tsallis")
    with pytest.raises(ValidationError):
        EntropySpec(kind="tsallis", alpha=-1.0)
    with pytest.raises(ValidationError):
        EntropySpec(kind="renyi", alpha=0.5)
    with pytest.raises(ValidationError):
        EntropySpec(kind="shannon", eta=0.0)
    with pytest.raises(ValidationError):
        EntropySpec(kind="entropy")


def test_entropy_labels_and_scaling():
    assert EntropySpec(kind="shannon").label == "H"
    assert EntropySpec(kind="tsallis", alpha=-0.5).label == "S_-0.5"
    assert EntropySpec(kind="renyi", alpha=-0.9).label == "R_-0.9"

    half = EntropySpec(kind="quadratic").scaled(2.0)
    assert half.label == "Q/2"
    assert half.scaled(1.5).eta == 3.0
    assert half.multiplied(2.0) == EntropySpec(kind="quadratic")
    assert EntropySpec(kind="tsallis", alpha=0.5).is_legendre is False


def test_entropy_spec_json():
    spec = EntropySpec(kind="tsallis", alpha=-0.5, eta=2.0)
    assert json.loads(spec.to_json()) == {"kind": "tsallis", "alpha": -0.5, "eta": 2.0}
    assert EntropySpec.from_json(spec.to_json()) == spec


def test_loss_spec_validation():
    with pytest.raises(ValidationError):
        LossSpec(kind="proper")
    with pytest.raises(ValidationError):
        LossSpec(kind="log", entropy=EntropySpec(kind="shannon"))
    with pytest.raises(ValidationError):
        LossSpec(kind="squared", resolution=1)
    with pytest.raises(ValidationError):
        LossSpec(kind="proper", entropy=EntropySpec(kind="shannon", dim=3), outcomes=2)


def test_loss_spec_labels():
    proper = LossSpec(kind="proper", entropy=EntropySpec(kind="tsallis", alpha=-0.5))
    assert proper.label == "proper[S_-0.5]"
    assert proper.is_proper
    assert LossSpec(kind="constant", level=0.25).label == "constant[0.25]"
    assert not LossSpec(kind="linear").is_proper
    assert LossSpec.from_json(proper.to_json()) == proper
    assert LossSpec(kind="log").with_outcomes(3).outcomes == 3
    assert LossSpec(kind="log", outcomes=3).action_resolution == 60


def test_game_config_fills_loss_outcomes():
    game = GameConfig.from_dict(
        {
            "experts": 3,
            "outcomes": 3,
            "rounds": 10,
            "loss": {"kind": "squared"},
            "entropy": {"kind": "shannon"},
            "prior": [0.2, 0.3, 0.5],
            "seed": 4,
        }
    )
    assert game.loss.outcomes == 3
    assert game.prior == ProbVector(weights=(0.2, 0.3, 0.5))
    assert game.label == "iid_random-squared-H-K3-s4"

    restored = GameConfig.from_dict(json.loads(game.to_json()))
    assert restored == game


def test_game_config_rejects_bad_values():
    base = {"experts": 2, "rounds": 5, "loss": {"kind": "log"}, "entropy": {"kind": "shannon"}}
    with pytest.raises(ValidationError):
        GameConfig.from_dict(base | {"rounds": 0})
    with pytest.raises(ValidationError):
        GameConfig.from_dict(base | {"scenario": "random_walk"})
    with pytest.raises(ValidationError):
        GameConfig.from_dict(base | {"correlation": 1.5})
    with pytest.raises(ValidationError):
        GameConfig.from_dict(base | {"prior": [0.5, 0.6]})


def test_report_cells():
    assert make_report().cell == "0.6931 (1)"
    assert make_report(eta_star=0.7071, regret=1.1716).cell == "1.172 (0.7071)"
    assert make_report(eta_star=1000.0, status="lower_bound").cell == "0.6931 (1000+)"
    assert make_report(eta_star=0.0, status="not_mixable", regret=None).cell == "—(0)"


def test_report_round_trip():
    report = make_report(notes=["a note"], samples=[(0.5, 0.1), (2.0, -0.2)])
    data = json.loads(report.to_json())
    assert data["cell"] == "0.6931 (1)"
    assert MixabilityReport.from_dict(data) == report


def test_report_samples_must_not_increase_with_eta():
    # Evaluation order is free, the check sorts by eta
    make_report(samples=[(1.0, 0.0), (1000.0, -2.0), (0.001, 0.3), (31.6, -1.0)])
    make_report(samples=[(0.5, 0.1), (2.0, 0.1 + 5e-7)])

    with pytest.raises(ValidationError) as excinfo:
        make_report(samples=[(0.5, -0.2), (2.0, 0.1)])
    assert "non-increasing" in str(excinfo.value)


def test_search_config():
    with pytest.raises(ValidationError):
        MixSearchConfig(eta_lo=5.0, eta_hi=1.0)
    with pytest.raises(ValidationError):
        MixSearchConfig(zoom_factor=1.0)

    cfg = MixSearchConfig(coarse_resolution=12, workers=4)
    metadata = cfg.metadata()
    assert metadata["coarse_resolution"] == 12
    assert "workers" not in metadata
    assert "tolerance" in metadata["dual"]


def test_run_manifest(tmp_path):
    manifest = RunManifest(command="table", seed=3, outputs=["a.csv", "a.json"])
    path = manifest.write(tmp_path / "out" / "table")
    assert path.name == "table.manifest.json"
    assert RunManifest.read(path) == manifest

    with pytest.raises(ValidationError):
        RunManifest(command="table", outputs=["a.csv", "a.csv"])
