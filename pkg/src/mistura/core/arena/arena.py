"""
Game harness.

Plays the generalized aggregating algorithm against a scenario, keeps exact
cumulative accounts and certifies the constant-regret bound

    sum_t l_{x^t}(p^t) <= sum_t l_{x^t}(A^t_theta) + D_Phi(delta_theta, mu^0)

for every expert theta over batches of games.
"""

import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from mistura.core.arena.generator import ScenarioGenerator
from mistura.core.config import config
from mistura.core.entropies import EntropyError, bregman
from mistura.core.gaa import GaaState
from mistura.core.losses import loss_table
from mistura.core.models.game import CertificationReport, GameConfig, GameTrace, RoundRecord
from mistura.core.models.mixability import MixSearchConfig
from mistura.core.models.simplex import ProbVector
from mistura.core.notifications import (
    NotificationManager,
    NotificationType,
    notification_manager,
)
from mistura.core.simplex import dirac, uniform

logger = logging.getLogger(__name__)


class GameError(ValueError):
    """Base exception for arena errors."""

    pass


class ConfigParseError(GameError):
    """Exception raised when a game configuration file cannot be parsed.

    Carries the offending key and line when they are known.
    """

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.key = key
        self.line = line


class GameAbortedError(GameError):
    """Exception raised when a solver failure ends a game; carries the partial trace."""

    def __init__(self, message: str, trace: GameTrace):
        super().__init__(message)
        self.trace = trace


def _line_of(text: str, key: str) -> Optional[int]:
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def parse_game_config(text: str, source: str = "<config>") -> GameConfig:
    """Parse a JSON game document.

    Raises:
        ConfigParseError: On malformed JSON or invalid fields, naming the key and line
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(f"{source}:{e.lineno}: {e.msg}", line=e.lineno) from e
    if not isinstance(data, dict):
        raise ConfigParseError(f"{source}: a game config must be a JSON object", line=1)
    try:
        game = GameConfig.from_dict(data)
    except ValidationError as e:
        error = e.errors()[0]
        names = [str(part) for part in error["loc"] if not isinstance(part, int)]
        key = ".".join(names) or None
        line = None
        for name in reversed(names):
            line = _line_of(text, name)
            if line is not None:
                break
        where = f"{source}:{line}" if line is not None else source
        raise ConfigParseError(
            f"{where}: invalid value for '{key}': {error['msg']}", key=key, line=line
        ) from e
    if game.prior is not None and not game.prior.is_interior() and game.entropy.is_legendre:
        line = _line_of(text, "prior")
        where = f"{source}:{line}" if line is not None else source
        raise ConfigParseError(
            f"{where}: invalid value for 'prior': {game.entropy.label} has an unbounded "
            "gradient on the simplex boundary, every prior weight must be positive",
            key="prior",
            line=line,
        )
    return game


def load_game_config(path: Path) -> GameConfig:
    """Read a ``.cfg`` game document from disk."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigParseError(f"cannot read {path}: {e}") from e
    return parse_game_config(text, source=str(path))


def _prior(game: GameConfig) -> ProbVector:
    if game.prior is not None:
        return game.prior
    if game.experts == 1:
        return dirac(1, 0)
    return uniform(game.experts)


def run_game(
    game: GameConfig,
    cfg: Optional[MixSearchConfig] = None,
    manager: Optional[NotificationManager] = None,
) -> GameTrace:
    """Play all rounds of a game.

    Raises:
        GameAbortedError: If the prior or a dual solver fails; the partial trace is attached
    """
    manager = manager or notification_manager
    cfg = cfg or MixSearchConfig()
    started = time.perf_counter()
    prior = _prior(game)
    entropy = game.entropy.with_dim(game.experts)
    bound = tuple(
        bregman(entropy, dirac(game.experts, theta), prior) for theta in range(game.experts)
    )
    generator = ScenarioGenerator(game)
    loss = game.loss

    records: List[RoundRecord] = []
    player_total = 0.0
    expert_totals = [0.0] * game.experts

    def finish(completed: bool, error: Optional[str] = None) -> GameTrace:
        return GameTrace(
            config=game,
            records=records,
            player_loss=player_total,
            expert_losses=tuple(expert_totals),
            bound=bound,
            completed=completed,
            error=error,
            seconds=time.perf_counter() - started,
        )

    def respond(candidates):
        _, points, _ = state.best_responses(candidates, loss, cfg)
        return points

    try:
        state = GaaState.init(entropy, prior, cfg.dual)
        for t in range(1, game.rounds + 1):
            A, x = generator.generate_experts(t, respond)
            prediction = state.predict(A, loss, cfg, game.violation_tolerance)
            player_loss = float(loss_table(loss, prediction.prediction.as_array())[x])
            expert_losses = tuple(float(v) for v in loss_table(loss, A.as_array())[:, x])
            record = RoundRecord(
                round=t,
                predictions=tuple(p.weights for p in A.predictions),
                mixture=tuple(float(v) for v in state.mu),
                prediction=prediction.prediction.weights,
                outcome=x,
                player_loss=player_loss,
                expert_losses=expert_losses,
                slack=prediction.slack,
                flagged=prediction.flagged,
            )
            records.append(record)
            player_total += player_loss
            for theta in range(game.experts):
                expert_totals[theta] += expert_losses[theta]
            state = state.update(A, loss, x, cross_check=game.cross_check)

            event = {"game": game.label, "round": t, "outcome": x, "slack": prediction.slack}
            manager.notify(NotificationType.ROUND_PLAYED, dict(event))
            if prediction.flagged:
                manager.notify(NotificationType.ROUND_FLAGGED, dict(event))
    except EntropyError as e:
        trace = finish(False, str(e))
        logger.error(f"Game {game.label} aborted after {trace.rounds_played} rounds: {e}")
        manager.notify(NotificationType.GAME_FINISHED, {"game": game.label, **trace.summary()})
        raise GameAbortedError(f"game {game.label} aborted: {e}", trace) from e

    trace = finish(True)
    logger.info(
        f"Game {game.label}: {trace.rounds_played} rounds, regret {trace.regret:.6g}, "
        f"min bound slack {trace.min_slack():.3e}, {len(trace.flagged_rounds)} flagged"
    )
    manager.notify(NotificationType.GAME_FINISHED, {"game": game.label, **trace.summary()})
    return trace


def play_batch(
    batch: Sequence[GameConfig],
    workers: Optional[int] = None,
    cfg: Optional[MixSearchConfig] = None,
    manager: Optional[NotificationManager] = None,
) -> List[GameTrace]:
    """Play every game; aborted games contribute their partial trace."""
    manager = manager or notification_manager

    def play(game: GameConfig) -> GameTrace:
        try:
            return run_game(game, cfg, manager)
        except GameAbortedError as e:
            return e.trace

    if workers and workers > 1 and len(batch) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(play, batch))
    return [play(game) for game in batch]


def certify_traces(
    traces: Sequence[GameTrace],
    tolerance: Optional[float] = None,
    manager: Optional[NotificationManager] = None,
) -> CertificationReport:
    """Check the bound for every expert of every played game."""
    manager = manager or notification_manager
    tolerance = config.bound_tolerance if tolerance is None else tolerance
    failures = [i for i, trace in enumerate(traces) if not trace.certified(tolerance)]
    report = CertificationReport(
        games=len(traces),
        certified=len(traces) - len(failures),
        tolerance=tolerance,
        min_slack=min((trace.min_slack() for trace in traces), default=0.0),
        max_regret=max((trace.regret for trace in traces), default=0.0),
        flagged_rounds=sum(len(trace.flagged_rounds) for trace in traces),
        failures=failures,
        summaries=[trace.summary(tolerance) for trace in traces],
    )
    if failures:
        logger.warning(f"{len(failures)} of {report.games} games failed certification")
    else:
        logger.info(f"All {report.games} games certified (min slack {report.min_slack:.3e})")
    manager.notify(
        NotificationType.BATCH_CERTIFIED,
        {"games": report.games, "certified": report.certified, "failures": failures},
    )
    return report


def certify_bound(
    batch: Sequence[GameConfig],
    workers: Optional[int] = None,
    tolerance: Optional[float] = None,
    cfg: Optional[MixSearchConfig] = None,
    manager: Optional[NotificationManager] = None,
) -> CertificationReport:
    """Run every game and check the bound for every expert.

    Flagged rounds, aborted games and violated bounds all fail certification;
    none of them stop the batch.
    """
    traces = play_batch(batch, workers, cfg, manager)
    return certify_traces(traces, tolerance, manager)


def export_trace(trace: GameTrace, out: Path) -> List[Path]:
    """Write ``<out>.csv`` with one line per round and ``<out>.summary.json``.

    Returns:
        List of written paths
    """
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = trace.to_rows()
    csv_path = Path(f"{out}.csv")
    with open(csv_path, "w", newline="") as f:
        fieldnames = list(rows[0].keys()) if rows else ["round"]
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    summary_path = Path(f"{out}.summary.json")
    summary = trace.summary() | {"config": trace.config.to_dict()}
    summary_path.write_text(json.dumps(summary, indent=2))
    logger.debug(f"Wrote trace of {trace.config.label} to {csv_path}")
    return [csv_path, summary_path]
