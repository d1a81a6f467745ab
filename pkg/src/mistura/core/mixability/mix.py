"""
The mixability bound and its witness.

Mix_x(A, mu) = inf_mu' <mu', l_x(A)> + D_Phi(mu', mu)
             = Phi*(grad Phi(mu)) - Phi*(grad Phi(mu) - l_x(A)).

The dual form is evaluated in batches; the infimum form runs the generic
simplex minimizer and serves as an independent check. The best response
maximizes min_x Mix_x - l_x(p) over the action grid, the experts' own
predictions and their mixture, then zooms in around the incumbent.
"""

import itertools
import logging
from typing import Optional, Tuple

import numpy as np

from mistura.core.config import config
from mistura.core.entropies import (
    bregman_array,
    grad_array,
    minimize_on_simplex,
    solve_rows,
)
from mistura.core.losses import action_grid, loss_matrix, loss_table
from mistura.core.models.entropy import DualEvalConfig, EntropySpec
from mistura.core.models.loss import ExpertPredictionSet, LossSpec
from mistura.core.models.mixability import BestResponse, MixSearchConfig
from mistura.core.models.simplex import ProbVector
from mistura.core.simplex import DimensionMismatchError, clamp_interior

logger = logging.getLogger(__name__)

# Entries of (rows x candidates x outcomes) arrays materialized at once
_BLOCK_ENTRIES = 4_000_000


class MixabilityError(ValueError):
    """Base exception for mixability computations."""

    pass


def _interior(phi: EntropySpec, mu: ProbVector) -> ProbVector:
    if phi.is_legendre:
        return clamp_interior(mu, config.clamp_epsilon)
    return mu


def _check_game(phi: EntropySpec, loss: LossSpec, A: ExpertPredictionSet, mu: ProbVector):
    if A.outcomes != loss.outcomes:
        raise DimensionMismatchError(
            f"{loss.label} has {loss.outcomes} outcomes, predictions have {A.outcomes}"
        )
    if mu.dim != A.experts:
        raise DimensionMismatchError(f"mixture over {mu.dim} experts for {A.experts} predictions")
    if phi.dim is not None and phi.dim != A.experts:
        raise DimensionMismatchError(f"{phi.label} lives on a {phi.dim}-simplex")


def mix_rows(
    phi: EntropySpec, L: np.ndarray, W: np.ndarray, cfg: Optional[DualEvalConfig] = None
) -> np.ndarray:
    """Dual-form Mix for a batch.

    Args:
        phi: Entropy (with its scale)
        L: Loss matrices with shape (n, |X|, K)
        W: Gradients grad Phi(mu) with shape (n, K)

    Returns:
        np.ndarray: Mix values with shape (n, |X|)
    """
    current, _ = solve_rows(phi, W, cfg)
    shifted, _ = solve_rows(phi, W[:, None, :] - L, cfg)
    return current[:, None] - shifted


def mix_dual(
    phi: EntropySpec,
    loss: LossSpec,
    A: ExpertPredictionSet,
    mu: ProbVector,
    x: int,
    cfg: Optional[DualEvalConfig] = None,
) -> float:
    """Mix bound in dual form, Phi*(grad Phi(mu)) - Phi*(grad Phi(mu) - l_x(A))."""
    _check_game(phi, loss, A, mu)
    mu = _interior(phi, mu)
    L = loss_matrix(loss, A).as_array()
    W = grad_array(phi, mu.as_array())
    return float(mix_rows(phi, L[None], W[None], cfg)[0, x])


def mix_inf(
    phi: EntropySpec, loss: LossSpec, A: ExpertPredictionSet, mu: ProbVector, x: int
) -> float:
    """Mix bound as the constrained minimum of <mu', l_x(A)> + D_Phi(mu', mu)."""
    _check_game(phi, loss, A, mu)
    mu = _interior(phi, mu)
    losses = loss_matrix(loss, A).row(x)
    base = mu.as_array()
    base_grad = grad_array(phi, base)

    def objective(m):
        return float(np.dot(m, losses) + bregman_array(phi, m, base))

    def gradient(m):
        return losses + grad_array(phi, m) - base_grad

    best, _ = minimize_on_simplex(objective, gradient, A.experts, start=base)
    return best


def _grid_stage(loss: LossSpec, targets: np.ndarray, extra: Optional[np.ndarray], resolution):
    """Best candidate among the action grid and per-row extra candidates."""
    grid, table = action_grid(loss, resolution)
    n, X = targets.shape
    values = np.empty(n)
    points = np.empty((n, X))
    block = max(1, _BLOCK_ENTRIES // max(1, grid.shape[0] * X))
    for start in range(0, n, block):
        rows = slice(start, start + block)
        scores = (targets[rows, None, :] - table[None, :, :]).min(axis=2)
        best = np.argmax(scores, axis=1)
        values[rows] = scores[np.arange(scores.shape[0]), best]
        points[rows] = grid[best]
    if extra is not None and extra.shape[1] > 0:
        scores = (targets[:, None, :] - loss_table(loss, extra)).min(axis=2)
        best = np.argmax(scores, axis=1)
        better = scores[np.arange(n), best] > values
        values = np.where(better, scores[np.arange(n), best], values)
        points[better] = extra[better, best[better]]
    return values, points


def _zoom_offsets(X: int, width: int) -> np.ndarray:
    """Offsets in the first X-1 coordinates, the zero offset first."""
    steps = range(-width, width + 1)
    offsets = [o for o in itertools.product(steps, repeat=X - 1) if any(o)]
    return np.array([(0,) * (X - 1)] + offsets, dtype=float)


def zoom_rows(
    loss: LossSpec,
    targets: np.ndarray,
    points: np.ndarray,
    values: np.ndarray,
    step: float,
    cfg: MixSearchConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    """Refine best responses by successively finer local searches.

    The incumbent is always the first candidate, so ties keep it.
    """
    n, X = targets.shape
    if X == 1 or cfg.zoom_levels == 0:
        return values, points
    offsets = _zoom_offsets(X, cfg.zoom_width)
    points = points.copy()
    values = values.copy()
    for _ in range(cfg.zoom_levels):
        step /= cfg.zoom_factor
        free = points[:, None, : X - 1] + step * offsets[None, :, :]
        last = 1.0 - free.sum(axis=2, keepdims=True)
        candidates = np.concatenate([free, last], axis=2)
        feasible = (candidates >= -1e-12).all(axis=2) & (candidates <= 1.0 + 1e-12).all(axis=2)
        candidates = np.clip(candidates, 0.0, 1.0)
        scores = (targets[:, None, :] - loss_table(loss, candidates)).min(axis=2)
        scores = np.where(feasible, scores, -np.inf)
        best = np.argmax(scores, axis=1)
        values = scores[np.arange(n), best]
        points = candidates[np.arange(n), best]
    return values, points


def best_response_rows(
    loss: LossSpec,
    targets: np.ndarray,
    extra: Optional[np.ndarray],
    cfg: MixSearchConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    """Sup over predictions of min_x targets_x - l_x(p) for a batch of rows.

    Args:
        loss: Loss specification
        targets: Mix bounds with shape (n, |X|)
        extra: Extra candidate predictions with shape (n, C, |X|) or None
        cfg: Search configuration (zoom settings, action resolution)

    Returns:
        Tuple of values (n,) and maximizing predictions (n, |X|)
    """
    resolution = cfg.action_resolution or loss.action_resolution
    values, points = _grid_stage(loss, targets, extra, resolution)
    return zoom_rows(loss, targets, points, values, 1.0 / resolution, cfg)


def find_best_response(
    phi: EntropySpec,
    loss: LossSpec,
    A: ExpertPredictionSet,
    mu: ProbVector,
    cfg: Optional[MixSearchConfig] = None,
) -> BestResponse:
    """The max-min witness prediction and its slack.

    A slack of at least minus the tolerance certifies the mixability
    inequality at (A, mu).
    """
    cfg = cfg or MixSearchConfig()
    _check_game(phi, loss, A, mu)
    mu = _interior(phi, mu)
    predictions = A.as_array()
    L = loss_table(loss, predictions).T
    W = grad_array(phi, mu.as_array())
    mix = mix_rows(phi, L[None], W[None], cfg.dual)
    mixture = mu.as_array() @ predictions
    extra = np.vstack([predictions, mixture[None, :]])[None]
    values, points = best_response_rows(loss, mix, extra, cfg)
    return BestResponse(
        prediction=ProbVector.from_array(points[0]),
        slack=float(values[0]),
        mix=tuple(float(m) for m in mix[0]),
    )


def entropic_gap_rows(
    F: EntropySpec, phi: EntropySpec, L: np.ndarray, W: np.ndarray, cfg: DualEvalConfig
) -> np.ndarray:
    """F*(-Mix) for a batch; nonpositive exactly where a mixability witness exists."""
    mix = mix_rows(phi, L, W, cfg)
    values, _ = solve_rows(F, -mix, cfg)
    return values

