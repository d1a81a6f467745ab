"""
Expert-prediction and outcome streams for the arena.

Every round draws from its own generator seeded with (seed, round), so a
stream is reproducible round by round whatever the player does, except for
the greedy adversary, which reacts to the player's predictions.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from mistura.core.losses import loss_table
from mistura.core.models.game import GameConfig
from mistura.core.models.loss import ExpertPredictionSet
from mistura.core.simplex import grid_array

logger = logging.getLogger(__name__)

# Resolution of the lattice experts draw their predictions from
PREDICTION_GRID_RESOLUTION = 20

# Maps expert prediction sets (n, K, |X|) to the player's predictions (n, |X|)
Responder = Callable[[np.ndarray], np.ndarray]


class ScenarioGenerator:
    """Produces (A^t, x^t) for every round of one game."""

    def __init__(self, game: GameConfig):
        self.game = game
        self.grid = grid_array(game.outcomes, PREDICTION_GRID_RESOLUTION)

    def _rng(self, round_index: int) -> np.random.Generator:
        return np.random.default_rng([self.game.seed, round_index])

    def _random_experts(self, rng: np.random.Generator, count: int) -> np.ndarray:
        picks = rng.integers(self.grid.shape[0], size=(count, self.game.experts))
        return self.grid[picks]

    def generate_experts(
        self, round_index: int, respond: Optional[Responder] = None
    ) -> Tuple[ExpertPredictionSet, int]:
        """Expert predictions and the outcome of one round.

        Args:
            round_index: Round number t, starting at 1
            respond: Player prediction function, required by the greedy adversary

        Returns:
            Tuple of the expert predictions and the outcome index
        """
        rng = self._rng(round_index)
        scenario = self.game.scenario
        if scenario == "iid_random":
            A = self._random_experts(rng, 1)[0]
            x = int(rng.integers(self.game.outcomes))
        elif scenario == "one_good_expert":
            x = int(rng.integers(self.game.outcomes))
            A = self._random_experts(rng, 1)[0]
            corr = self.game.correlation
            good = np.full(self.game.outcomes, (1.0 - corr) / self.game.outcomes)
            good[x] += corr
            A[0] = good
        elif scenario == "greedy_adversary":
            if respond is None:
                raise ValueError("the greedy adversary needs the player's prediction function")
            A, x = self._greedy(rng, respond)
        else:
            raise ValueError(f"unknown scenario {scenario!r}")
        return ExpertPredictionSet.from_array(A), x

    def _greedy(self, rng: np.random.Generator, respond: Responder) -> Tuple[np.ndarray, int]:
        """One-step lookahead: the candidate and outcome with the largest instantaneous regret."""
        candidates = self._random_experts(rng, self.game.adversary_candidates)
        predictions = respond(candidates)
        loss = self.game.loss
        player = loss_table(loss, predictions)
        best_expert = loss_table(loss, candidates).min(axis=1)
        regret = player - best_expert
        c, x = np.unravel_index(int(np.argmax(regret)), regret.shape)
        logger.debug(f"Greedy adversary picked candidate {c}, outcome {x}")
        return candidates[c], int(x)
