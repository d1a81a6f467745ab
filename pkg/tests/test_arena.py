"""
Tests for the game harness: config parsing, games, certification and exports.
"""
import csv
import json
import operator
from functools import reduce

import numpy as np
import pytest

from mistura.core.arena import (
    ConfigParseError,
    GameAbortedError,
    GameError,
    certify_bound,
    certify_traces,
    export_trace,
    load_game_config,
    parse_game_config,
    play_batch,
    run_game,
)
from mistura.core.entropies import DualSolverError
from mistura.core.gaa import GaaState
from mistura.core.models.game import GameConfig
from mistura.core.notifications import NotificationType


def make_game(**overrides) -> GameConfig:
    data = {
        "experts": 2,
        "rounds": 20,
        "loss": {"kind": "log"},
        "entropy": {"kind": "shannon"},
        "seed": 1,
    }
    data.update(overrides)
    return GameConfig.from_dict(data)


def test_shipped_configs_parse(config_path):
    game = load_game_config(config_path("shannon_log_2x2.cfg"))
    assert game.label == "shannon-log-2x2"
    assert game.rounds == 100
    assert game.loss.outcomes == 2

    matched = load_game_config(config_path("tsallis_matched_2x2.cfg"))
    assert matched.loss.entropy == matched.entropy
    assert matched.scenario == "greedy_adversary"


def test_malformed_json_names_the_line():
    text = '{\n  "experts": 2,\n  "outcomes": 2,\n  "rounds" 10,\n  "loss": {"kind": "log"}\n}'
    with pytest.raises(ConfigParseError) as excinfo:
        parse_game_config(text, source="bad.cfg")
    assert excinfo.value.line == 4
    assert str(excinfo.value).startswith("bad.cfg:4:")


def test_invalid_value_names_key_and_line():
    text = (
        "{\n"
        '  "rounds": 10,\n'
        '  "experts": 0,\n'
        '  "loss": {"kind": "log"},\n'
        '  "entropy": {"kind": "shannon"}\n'
        "}"
    )
    with pytest.raises(ConfigParseError) as excinfo:
        parse_game_config(text)
    assert excinfo.value.key == "experts"
    assert excinfo.value.line == 3


def test_unknown_key_and_bad_documents(tmp_path):
    data = {"experts": 2, "rounds": 3, "loss": {"kind": "log"}, "entropy": {"kind": "shannon"}}
    text = json.dumps(data | {"colour": "blue"})
    with pytest.raises(ConfigParseError) as excinfo:
        parse_game_config(text)
    assert excinfo.value.key == "colour"

    with pytest.raises(ConfigParseError):
        parse_game_config("[1, 2]")
    with pytest.raises(ConfigParseError):
        load_game_config(tmp_path / "missing.cfg")


def test_game_config_mismatches():
    with pytest.raises(ValueError):
        make_game(entropy={"kind": "shannon", "dim": 3})
    with pytest.raises(ValueError):
        make_game(prior=[0.2, 0.3, 0.5])
    with pytest.raises(ValueError):
        make_game(outcomes=3, loss={"kind": "log", "outcomes": 2})


def test_run_game_certifies_and_accounts_exactly(config_path, manager):
    game = load_game_config(config_path("shannon_log_2x2.cfg"))
    trace = run_game(game, manager=manager)

    assert trace.completed
    assert trace.rounds_played == 100
    assert not trace.flagged_rounds
    assert trace.certified()
    assert trace.regret <= trace.bound[0] + 1e-5

    # Cumulative losses are running sums in round order
    assert trace.player_loss == reduce(operator.add, [r.player_loss for r in trace.records], 0.0)
    for theta in range(game.experts):
        expert = [r.expert_losses[theta] for r in trace.records]
        assert trace.expert_losses[theta] == reduce(operator.add, expert, 0.0)


def test_games_are_deterministic(manager):
    game = make_game(rounds=15, seed=99)
    first = run_game(game, manager=manager)
    second = run_game(game, manager=manager)
    assert first.records == second.records


def test_one_good_expert_stream(manager):
    game = make_game(experts=3, outcomes=3, rounds=10, scenario="one_good_expert", correlation=0.9)
    trace = run_game(game, manager=manager)
    for record in trace.records:
        good = record.predictions[0]
        assert good[record.outcome] == pytest.approx(0.9 + 0.1 / 3)
        assert min(good) == pytest.approx(0.1 / 3)
    assert trace.certified()


def test_greedy_adversary_against_matched_tsallis(config_path, manager):
    game = load_game_config(config_path("tsallis_matched_2x2.cfg"))
    trace = run_game(game, manager=manager)
    assert trace.certified()
    assert min(trace.bound_slack()) >= -1e-5


def test_too_large_eta_is_flagged(config_path, manager):
    game = load_game_config(config_path("shannon_log_eta_too_large.cfg"))
    flagged = []
    manager.subscribe(NotificationType.ROUND_FLAGGED, flagged.append)

    trace = run_game(game, manager=manager)

    assert trace.completed
    assert trace.flagged_rounds
    assert len(flagged) == len(trace.flagged_rounds)
    assert not trace.certified()


def test_solver_failure_aborts_with_partial_trace(monkeypatch, manager):
    def failing_update(self, A, loss, x, cross_check=False):
        raise DualSolverError("multiplier search did not converge")

    monkeypatch.setattr(GaaState, "update", failing_update)
    finished = []
    manager.subscribe(NotificationType.GAME_FINISHED, finished.append)

    with pytest.raises(GameAbortedError) as excinfo:
        run_game(make_game(rounds=5), manager=manager)

    trace = excinfo.value.trace
    assert not trace.completed
    assert trace.rounds_played == 1
    assert "did not converge" in trace.error
    assert not trace.certified()
    assert finished[0]["completed"] is False

    # Batches keep going and report the aborted game as a failure
    report = certify_bound([make_game(rounds=5)], manager=manager)
    assert report.failures == [0]
    assert not report.all_certified


def test_boundary_prior_is_a_config_error():
    data = {
        "experts": 2,
        "rounds": 5,
        "loss": {"kind": "log"},
        "entropy": {"kind": "shannon"},
        "prior": [1.0, 0.0],
    }
    with pytest.raises(ConfigParseError) as excinfo:
        parse_game_config(json.dumps(data, indent=2), source="edge.cfg")
    assert excinfo.value.key == "prior"
    assert excinfo.value.line == 6
    assert "unbounded" in str(excinfo.value)

    for entropy in ({"kind": "tsallis", "alpha": -0.5}, {"kind": "renyi", "alpha": -0.5}):
        with pytest.raises(ConfigParseError):
            parse_game_config(json.dumps(data | {"entropy": entropy}))

    # Bounded gradients on the boundary, so the prior is usable
    game = parse_game_config(json.dumps(data | {"entropy": {"kind": "quadratic"}}))
    assert game.prior.weights == (1.0, 0.0)


def test_boundary_prior_aborts_only_its_game(manager):
    good = make_game(rounds=5)
    edge = make_game(rounds=5, prior=[1.0, 0.0])
    finished = []
    manager.subscribe(NotificationType.GAME_FINISHED, finished.append)

    with pytest.raises(GameAbortedError) as excinfo:
        run_game(edge, manager=manager)
    assert excinfo.value.trace.rounds_played == 0
    assert "unbounded" in excinfo.value.trace.error

    report = certify_bound([good, edge], manager=manager)
    assert report.games == 2
    assert report.certified == 1
    assert report.failures == [1]
    assert report.summaries[1]["completed"] is False
    assert finished[0]["completed"] is False


def test_game_notifications(manager):
    game = make_game(rounds=5, name="watched")
    played, game_events = [], []
    manager.subscribe(NotificationType.ROUND_PLAYED, played.append)
    manager.subscribe_game("watched", game_events.append)

    run_game(game, manager=manager)

    assert [event["round"] for event in played] == [1, 2, 3, 4, 5]
    assert len(game_events) == 6
    assert game_events[-1]["event_type"] == NotificationType.GAME_FINISHED.value
    assert "watched" not in manager.game_subscribers


def test_batch_keeps_input_order(manager):
    seeds = [5, 6, 7]
    batch = [make_game(rounds=8, seed=seed, scenario="iid_random") for seed in seeds]
    batches = []
    manager.subscribe(NotificationType.BATCH_CERTIFIED, batches.append)

    traces = play_batch(batch, workers=2, manager=manager)
    assert [trace.config.seed for trace in traces] == seeds

    report = certify_traces(traces, manager=manager)
    assert report.games == 3
    assert report.all_certified
    assert report.certified_fraction == 1.0
    assert batches[0]["certified"] == 3


def test_export_trace(tmp_path, manager):
    trace = run_game(make_game(rounds=4, name="exported"), manager=manager)
    paths = export_trace(trace, tmp_path / "runs" / "game.v1")

    assert [p.name for p in paths] == ["game.v1.csv", "game.v1.summary.json"]
    with open(paths[0], newline="") as f:
        rows = list(csv.DictReader(f))
    assert [int(row["round"]) for row in rows] == [1, 2, 3, 4]
    assert "expert_1_loss" in rows[0]

    summary = json.loads(paths[1].read_text())
    assert summary["game"] == "exported"
    assert summary["certified"] is True
    assert summary["config"]["rounds"] == 4


def test_arena_errors_are_value_errors():
    for error in (GameError, ConfigParseError, GameAbortedError):
        assert issubclass(error, ValueError)
    with pytest.raises(ValueError):
        parse_game_config("[1, 2]")


@pytest.mark.parametrize("experts", [2, 3])
@pytest.mark.parametrize(
    "entropy, loss",
    [
        ({"kind": "shannon"}, {"kind": "log"}),
        (
            {"kind": "tsallis", "alpha": -0.5},
            {"kind": "proper", "entropy": {"kind": "tsallis", "alpha": -0.5}},
        ),
    ],
    ids=["H-log", "S-matched"],
)
def test_single_round_game(experts, entropy, loss, manager):
    game = make_game(
        experts=experts, rounds=1, entropy=entropy, loss=loss, scenario="greedy_adversary"
    )
    trace = run_game(game, manager=manager)
    assert trace.completed
    assert trace.rounds_played == 1
    assert trace.certified()
    assert trace.min_slack() >= -1e-5


def test_batch_above_the_mixability_constant_fails(manager):
    # Shannon with log loss is mixable up to eta = 1
    batch = [
        make_game(
            rounds=10,
            seed=seed,
            entropy={"kind": "shannon", "eta": 2.0},
            scenario="greedy_adversary",
        )
        for seed in range(4)
    ]
    report = certify_bound(batch, manager=manager)
    assert report.games == 4
    assert report.certified == 0
    assert report.failures == [0, 1, 2, 3]
    assert report.flagged_rounds > 0
    assert not report.all_certified


def random_batch(games: int, max_rounds: int, seed: int) -> list:
    """Matched games over K in {2, 3, 5}, both scenarios and random lengths."""
    tsallis = {"kind": "tsallis", "alpha": -0.5}
    pairs = [
        ({"kind": "shannon"}, {"kind": "log"}),
        (tsallis, {"kind": "proper", "entropy": tsallis}),
    ]
    rng = np.random.default_rng(seed)
    batch = []
    for i in range(games):
        entropy, loss = pairs[int(rng.integers(len(pairs)))]
        batch.append(
            make_game(
                name=f"game-{i:04d}",
                experts=int(rng.choice([2, 3, 5])),
                rounds=int(rng.integers(1, max_rounds + 1)),
                entropy=entropy,
                loss=loss,
                scenario=str(rng.choice(["iid_random", "greedy_adversary"])),
                seed=int(rng.integers(2**31)),
            )
        )
    return batch


def test_random_batch_certifies(manager):
    report = certify_bound(random_batch(12, 15, seed=3), workers=2, manager=manager)
    assert report.games == 12
    assert report.all_certified
    assert report.min_slack >= -1e-5


@pytest.mark.slow
def test_thousand_random_games_certify(manager):
    report = certify_bound(random_batch(1000, 200, seed=2024), workers=4, manager=manager)
    assert report.games == 1000
    assert report.certified_fraction == 1.0
    assert report.flagged_rounds == 0
    assert report.min_slack >= -1e-5
