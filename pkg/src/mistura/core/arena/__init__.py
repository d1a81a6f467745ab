from mistura.core.arena.arena import (
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
from mistura.core.arena.generator import PREDICTION_GRID_RESOLUTION, ScenarioGenerator

__all__ = [
    "ConfigParseError",
    "GameAbortedError",
    "GameError",
    "PREDICTION_GRID_RESOLUTION",
    "ScenarioGenerator",
    "certify_bound",
    "certify_traces",
    "export_trace",
    "load_game_config",
    "parse_game_config",
    "play_batch",
    "run_game",
]
