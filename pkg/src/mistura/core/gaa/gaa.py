"""
The generalized aggregating algorithm.

The state lives in the dual space: w^t = grad Phi(mu^0) - sum_s l_{x^s}(A^s)
and mu^t = grad Phi*(w^t). Predictions are the max-min witness of the Mix
bound computed from w^t directly, so they stay exact when mu^t underflows.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from mistura.core.config import config
from mistura.core.entropies import (
    grad,
    grad_array,
    minimize_on_simplex,
    solve_rows,
    value_array,
)
from mistura.core.losses import loss_table
from mistura.core.mixability import best_response_rows, mix_rows
from mistura.core.models.entropy import DualEvalConfig, EntropySpec
from mistura.core.models.game import GaaSnapshot, Prediction
from mistura.core.models.loss import ExpertPredictionSet, LossSpec
from mistura.core.models.mixability import MixSearchConfig
from mistura.core.models.simplex import DualVector, ProbVector
from mistura.core.simplex import DimensionMismatchError

logger = logging.getLogger(__name__)

# Agreement required between the dual update and the direct argmin
CROSS_CHECK_TOLERANCE = 1e-5


class GaaState:
    """Mixture, dual accumulator and round counter of one player.

    States are replaced rather than mutated: ``update`` returns the next state.
    """

    def __init__(
        self,
        entropy: EntropySpec,
        mu: np.ndarray,
        w: np.ndarray,
        t: int = 0,
        dual_cfg: Optional[DualEvalConfig] = None,
    ):
        self.entropy = entropy
        self.mu = np.asarray(mu, dtype=float)
        self.w = np.asarray(w, dtype=float)
        self.t = t
        self.dual_cfg = dual_cfg or DualEvalConfig()
        self.cross_check_deviation: Optional[float] = None

    @classmethod
    def init(
        cls, phi: EntropySpec, mu0: ProbVector, dual_cfg: Optional[DualEvalConfig] = None
    ) -> "GaaState":
        """Start from mu^0 with w^0 = grad Phi(mu^0).

        Raises:
            BoundaryGradientError: If mu^0 is on the boundary of a Legendre entropy's domain
        """
        phi = phi.with_dim(mu0.dim) if phi.dim is None else phi
        w0 = grad(phi, mu0)
        return cls(phi, mu0.as_array(), w0.as_array(), 0, dual_cfg)

    @property
    def experts(self) -> int:
        return self.mu.shape[0]

    @property
    def mixture(self) -> ProbVector:
        return ProbVector.from_array(self.mu)

    def dual_value(self) -> float:
        """Phi*(w^t)."""
        values, _ = solve_rows(self.entropy, self.w, self.dual_cfg)
        return float(values)

    def _losses(self, A: ExpertPredictionSet, loss: LossSpec) -> np.ndarray:
        if A.experts != self.experts:
            raise DimensionMismatchError(f"{A.experts} predictions for {self.experts} experts")
        return loss_table(loss, A.as_array()).T

    def predict(
        self,
        A: ExpertPredictionSet,
        loss: LossSpec,
        cfg: Optional[MixSearchConfig] = None,
        tolerance: Optional[float] = None,
    ) -> Prediction:
        """The max-min witness for the Mix bound at the current state.

        A slack below minus the tolerance flags the round instead of failing it.
        """
        tolerance = config.violation_tolerance if tolerance is None else tolerance
        if A.experts != self.experts:
            raise DimensionMismatchError(f"{A.experts} predictions for {self.experts} experts")
        values, points, mix = self.best_responses(A.as_array()[None], loss, cfg)
        slack = float(values[0])
        flagged = slack < -tolerance
        if flagged:
            logger.warning(
                f"Round {self.t + 1}: no prediction meets the Mix bound (slack {slack:.3e})"
            )
        return Prediction(
            prediction=ProbVector.from_array(points[0]),
            slack=slack,
            mix=tuple(float(m) for m in mix[0]),
            flagged=flagged,
        )

    def best_responses(
        self, predictions: np.ndarray, loss: LossSpec, cfg: Optional[MixSearchConfig] = None
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Witnesses for a batch of expert prediction sets at the current state.

        Args:
            predictions: Expert predictions with shape (n, K, |X|)
            loss: Loss specification
            cfg: Best-response search settings

        Returns:
            Tuple of slacks (n,), predictions (n, |X|) and Mix bounds (n, |X|)
        """
        cfg = cfg or MixSearchConfig()
        predictions = np.asarray(predictions, dtype=float)
        L = loss_table(loss, predictions).transpose(0, 2, 1)
        W = np.broadcast_to(self.w, (predictions.shape[0], self.experts))
        mix = mix_rows(self.entropy, L, W, self.dual_cfg)
        mixture = np.einsum("k,nkx->nx", self.mu, predictions)
        extra = np.concatenate([predictions, mixture[:, None, :]], axis=1)
        values, points = best_response_rows(loss, mix, extra, cfg)
        return values, points, mix

    def update(
        self, A: ExpertPredictionSet, loss: LossSpec, x: int, cross_check: bool = False
    ) -> "GaaState":
        """w^t = w^{t-1} - l_x(A) and mu^t = grad Phi*(w^t).

        With ``cross_check`` the mixture is also computed as the argmin of
        <mu', l_x(A)> + D_Phi(mu', mu^{t-1}) and the deviation is recorded.
        """
        losses = self._losses(A, loss)[x]
        w = self.w - losses
        _, mu = solve_rows(self.entropy, w, self.dual_cfg)
        state = GaaState(self.entropy, mu, w, self.t + 1, self.dual_cfg)
        if cross_check:
            direct = self._argmin_update(losses)
            state.cross_check_deviation = float(np.abs(direct - mu).max())
            if state.cross_check_deviation > CROSS_CHECK_TOLERANCE:
                logger.warning(
                    f"Round {state.t}: dual update and direct argmin differ by "
                    f"{state.cross_check_deviation:.3e}"
                )
        return state

    def _argmin_update(self, losses: np.ndarray) -> np.ndarray:
        # grad Phi(mu^{t-1}) equals w^{t-1} up to a multiple of the ones vector
        phi, base, w = self.entropy, self.mu, self.w
        base_value = float(value_array(phi, base))

        def objective(m):
            divergence = value_array(phi, m) - base_value - np.dot(m - base, w)
            return float(np.dot(m, losses) + divergence)

        def gradient(m):
            return losses + grad_array(phi, m) - w

        _, mu = minimize_on_simplex(objective, gradient, self.experts, start=base)
        return mu

    def snapshot(self) -> GaaSnapshot:
        return GaaSnapshot(
            entropy=self.entropy,
            mu=tuple(float(v) for v in self.mu),
            w=tuple(float(v) for v in self.w),
            t=self.t,
        )

    @classmethod
    def from_snapshot(
        cls, snapshot: GaaSnapshot, dual_cfg: Optional[DualEvalConfig] = None
    ) -> "GaaState":
        mu, w = np.array(snapshot.mu), np.array(snapshot.w)
        return cls(snapshot.entropy, mu, w, snapshot.t, dual_cfg)

    def dual_vector(self) -> DualVector:
        return DualVector.from_array(self.w)


class ExponentialWeights:
    """The classical aggregating-algorithm mixture update mu_theta <- mu_theta exp(-eta l_theta)."""

    def __init__(self, eta: float, prior: ProbVector):
        if eta <= 0:
            raise ValueError(f"eta must be positive, got {eta}")
        self.eta = eta
        self.log_weights = np.log(prior.as_array())

    @property
    def mu(self) -> np.ndarray:
        shifted = np.exp(self.log_weights - self.log_weights.max())
        return shifted / shifted.sum()

    def update(self, losses: np.ndarray) -> np.ndarray:
        self.log_weights = self.log_weights - self.eta * np.asarray(losses, dtype=float)
        return self.mu
