"""
Losses over the outcome simplex.

Log loss, the squared (Brier-type) loss ||a - delta_x||^2, proper losses
l^F(p) = F*(grad F(p)) 1 - grad F(p) built from an entropy F, and the two
diagnostic losses. Batched evaluation works on (..., |X|) arrays.
"""

import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from mistura.core.config import config
from mistura.core.entropies import entropic_dual, grad, grad_array, value_array
from mistura.core.models.entropy import DualEvalConfig, EntropySpec
from mistura.core.models.loss import (
    ExpertPredictionSet,
    LossMatrix,
    LossSpec,
    ProprietyReport,
    QuasiconvexityReport,
)
from mistura.core.models.simplex import DualVector, ProbVector
from mistura.core.simplex import (
    DimensionMismatchError,
    clamp_interior,
    clamp_rows,
    grid_array,
    inner_rows,
)

logger = logging.getLogger(__name__)


class LossError(ValueError):
    """Base exception for loss evaluation errors."""

    pass


class InfiniteLossError(LossError):
    """Exception raised when an unclamped boundary prediction has infinite loss."""

    pass


def loss_table(loss: LossSpec, P: np.ndarray, clamp: bool = True) -> np.ndarray:
    """Loss vectors (l_x(a))_x for every prediction row of P.

    Proper losses use the attained form F*(grad F(p)) = <p, grad F(p)> - F(p).

    Args:
        loss: Loss specification
        P: Predictions with shape (..., |X|)
        clamp: Clamp boundary predictions instead of rejecting them

    Returns:
        np.ndarray: Losses with the same shape as P
    """
    P = np.asarray(P, dtype=float)
    if P.shape[-1] != loss.outcomes:
        raise DimensionMismatchError(
            f"{loss.label} expects {loss.outcomes} outcomes, got predictions of size {P.shape[-1]}"
        )
    if loss.kind == "log":
        if not clamp and np.any(P <= 0.0):
            raise InfiniteLossError("log loss of a prediction with a zero coordinate is infinite")
        return -np.log(np.maximum(P, config.log_loss_epsilon))
    if loss.kind == "squared":
        return np.square(P).sum(axis=-1, keepdims=True) - 2.0 * P + 1.0
    if loss.kind == "linear":
        return -P
    if loss.kind == "constant":
        return np.full_like(P, loss.level)

    F = loss.entropy
    shape = P.shape
    flat = P.reshape(-1, shape[-1])
    if F.is_legendre:
        flat = clamp_rows(flat, config.clamp_epsilon)
    G = grad_array(F, flat)
    bayes = inner_rows(flat, G) - value_array(F, flat)
    return (bayes[:, None] - G).reshape(shape)


def proper_loss_from_entropy(
    F: EntropySpec, p: ProbVector, cfg: Optional[DualEvalConfig] = None
) -> DualVector:
    """The proper loss l^F(p) = F*(grad F(p)) 1 - grad F(p), dual evaluated numerically."""
    if F.is_legendre:
        p = clamp_interior(p, config.clamp_epsilon)
    g = grad(F, p)
    dual = entropic_dual(F, g, cfg, certify=False)
    return DualVector.from_array(dual - g.as_array())


def loss_vector(loss: LossSpec, a: ProbVector, clamp: bool = True) -> DualVector:
    """Loss vector (l_x(a))_x of a single prediction."""
    if loss.kind == "proper":
        if a.dim != loss.outcomes:
            raise DimensionMismatchError(f"{loss.label} expects {loss.outcomes} outcomes")
        return proper_loss_from_entropy(loss.entropy, a)
    return DualVector.from_array(loss_table(loss, a.as_array(), clamp=clamp))


def loss_matrix(loss: LossSpec, A: ExpertPredictionSet) -> LossMatrix:
    """Matrix of l_x(A_theta) with outcomes as rows and experts as columns."""
    table = loss_table(loss, A.as_array())
    return LossMatrix(entries=tuple(tuple(float(v) for v in row) for row in table.T))


def action_grid(loss: LossSpec, resolution: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Cached action lattice and its loss table for a loss.

    The resolution defaults to the loss's own, read from the current config
    on every call.

    Returns:
        Tuple of grid points (G, |X|) and their losses (G, |X|), both read-only
    """
    return _action_grid(loss, resolution or loss.action_resolution)


@lru_cache(maxsize=32)
def _action_grid(loss: LossSpec, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    grid = grid_array(loss.outcomes, resolution)
    table = loss_table(loss, grid)
    grid.flags.writeable = False
    table.flags.writeable = False
    logger.debug(f"Built {grid.shape[0]}-point action grid for {loss.label}")
    return grid, table


def bayes_risk(loss: LossSpec, p: ProbVector, resolution: Optional[int] = None) -> float:
    """Minimum over the action grid of the expected loss <p, l(a)>."""
    if p.dim != loss.outcomes:
        raise DimensionMismatchError(f"{loss.label} expects {loss.outcomes} outcomes")
    _, table = action_grid(loss, resolution or loss.action_resolution)
    return float(np.min(table @ p.as_array()))


def propriety_check(
    loss: LossSpec, samples: int = 100, seed: Optional[int] = None
) -> ProprietyReport:
    """Check that the expected loss under p is minimized within one grid cell of p."""
    seed = config.default_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    resolution = loss.action_resolution
    grid, table = action_grid(loss, resolution)
    ps = rng.dirichlet(np.ones(loss.outcomes), size=samples)
    best = np.argmin(ps @ table.T, axis=1)
    distance = np.abs(grid[best] - ps).max(axis=1)
    excess = np.maximum(distance - 1.0 / resolution - 1e-12, 0.0)
    violations = int(np.count_nonzero(excess > 0.0))
    if violations:
        logger.info(f"{loss.label}: {violations} of {samples} samples violate propriety")
    return ProprietyReport(
        loss=loss.label,
        samples=samples,
        seed=seed,
        resolution=resolution,
        violations=violations,
        max_violation=float(excess.max(initial=0.0)),
    )


def quasiconvexity_probe(
    loss: LossSpec, p: ProbVector, trials: int = 10_000, seed: Optional[int] = None
) -> QuasiconvexityReport:
    """Sample chords t q1 + (1 - t) q2 and check <p, l(.)> stays below the endpoint maximum."""
    seed = config.default_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    q1 = rng.dirichlet(np.ones(loss.outcomes), size=trials)
    q2 = rng.dirichlet(np.ones(loss.outcomes), size=trials)
    t = rng.uniform(0.0, 1.0, size=(trials, 1))
    points = np.stack([q1, q2, t * q1 + (1.0 - t) * q2])
    expected = loss_table(loss, points) @ p.as_array()
    excess = expected[2] - np.maximum(expected[0], expected[1])
    violations = int(np.count_nonzero(excess > 1e-9))
    return QuasiconvexityReport(
        loss=loss.label,
        trials=trials,
        seed=seed,
        violations=violations,
        max_excess=float(max(excess.max(), 0.0)),
    )
