"""
Entropic dual solvers.

Phi*(v) = sup over the simplex of <mu, v> - Phi(mu), together with the
maximizing mu = grad Phi*(v). Every family has an exact solver working on
batches of rows:

- Shannon: log-sum-exp and softmax.
- Quadratic: Euclidean projection of uniform + v/2 onto the simplex.
- Tsallis and Renyi: the stationarity conditions give mu in closed form up
  to one Lagrange multiplier per row, found by bisection.

A generic solver (BFGS over a softmax parameterization) handles arbitrary
smooth objectives on the simplex and is used for cross-checks.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from mistura.core.entropies.families import grad_rows, value_rows
from mistura.core.models.entropy import DualEvalConfig, EntropySpec
from mistura.core.simplex import grid_array, inner_rows, project_rows

logger = logging.getLogger(__name__)

# Relative bracket width at which the multiplier search stops early
_BRACKET_REL_WIDTH = 4 * np.finfo(float).eps
# Floor used when a gradient is evaluated at an underflowed softmax weight
_TINY = 1e-300


class EntropyError(ValueError):
    """Base exception for entropy evaluation errors."""

    pass


class DualSolverError(EntropyError):
    """Exception raised when the entropic dual cannot be computed to tolerance.

    Carries the best value and maximizer found so far.
    """

    def __init__(self, message: str, best_value=None, best_point=None):
        super().__init__(message)
        self.best_value = best_value
        self.best_point = best_point


def _bisect(residual: Callable, lo: np.ndarray, hi: np.ndarray, cfg: DualEvalConfig):
    """Vectorized bisection for a residual positive at lo and nonpositive at hi."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(cfg.max_iterations):
        mid = 0.5 * (lo + hi)
        positive = residual(mid) > 0.0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
        if np.all(hi - lo <= _BRACKET_REL_WIDTH * hi):
            break
    converged = (hi - lo) <= cfg.tolerance * np.maximum(hi, 1.0)
    return 0.5 * (lo + hi), converged


def _tsallis_rows(alpha: float, V: np.ndarray, cfg: DualEvalConfig):
    K = V.shape[1]
    gap = V.max(axis=1, keepdims=True) - V
    if alpha < 0.0:
        c = -alpha / (alpha + 1.0)

        def weights(t):
            return np.power(c * (t[:, None] + gap), 1.0 / alpha)

        def residual(t):
            return weights(t).sum(axis=1) - 1.0

        lo = np.full(V.shape[0], 1.0 / c)
        hi = np.full(V.shape[0], K ** (-alpha) / c)
    else:
        c = alpha / (alpha + 1.0)

        def weights(t):
            return np.power(c * np.maximum(t[:, None] - gap, 0.0), 1.0 / alpha)

        def residual(t):
            return 1.0 - weights(t).sum(axis=1)

        lo = np.full(V.shape[0], K ** (-alpha) / c)
        hi = np.full(V.shape[0], 1.0 / c)
    t, converged = _bisect(residual, lo, hi, cfg)
    mu = weights(t)
    return mu / mu.sum(axis=1, keepdims=True), converged


def _renyi_rows(alpha: float, V: np.ndarray, cfg: DualEvalConfig):
    kappa = -alpha / (alpha + 1.0)
    gap = V.max(axis=1, keepdims=True) - V

    # mu is proportional to (t + gap)^(1/alpha); ratios to t keep powers bounded
    def weights(t):
        return np.power((t[:, None] + gap) / t[:, None], 1.0 / alpha)

    def residual(t):
        return (weights(t) * (1.0 - kappa * (t[:, None] + gap))).sum(axis=1)

    lo = np.zeros(V.shape[0])
    hi = np.full(V.shape[0], 1.0 / kappa)
    t, converged = _bisect(residual, lo, hi, cfg)
    mu = weights(t)
    return mu / mu.sum(axis=1, keepdims=True), converged


def maximizer_rows(kind: str, alpha, V: np.ndarray, cfg: DualEvalConfig) -> np.ndarray:
    """grad Phi*(v) for unit-scale Phi, each row of V; raises on non-convergence."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if not np.all(np.isfinite(V)):
        raise DualSolverError("entropic dual requires finite dual vectors")
    if kind == "shannon":
        return softmax(V, axis=1)
    if kind == "quadratic":
        K = V.shape[1]
        return project_rows(1.0 / K + 0.5 * V)
    if kind == "tsallis":
        mu, converged = _tsallis_rows(alpha, V, cfg)
    elif kind == "renyi":
        mu, converged = _renyi_rows(alpha, V, cfg)
    else:
        raise ValueError(f"unknown entropy kind {kind!r}")
    if not np.all(converged):
        best = inner_rows(mu, V) - value_rows(kind, alpha, mu)
        raise DualSolverError(
            f"{kind} dual multiplier search did not converge in {cfg.max_iterations} iterations",
            best_value=best,
            best_point=mu,
        )
    return mu


def solve_rows(
    spec: EntropySpec, V: np.ndarray, cfg: Optional[DualEvalConfig] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Dual values and maximizers of Phi_eta for a batch of dual vectors.

    Uses Phi_eta*(v) = Phi*(eta v) / eta and grad Phi_eta*(v) = grad Phi*(eta v).

    Args:
        spec: Entropy, including its scale
        V: Array of shape (..., K)
        cfg: Solver accuracy settings

    Returns:
        Tuple of values with shape (...) and maximizers with shape (..., K)
    """
    cfg = cfg or DualEvalConfig()
    V = np.asarray(V, dtype=float)
    shape = V.shape
    flat = V.reshape(-1, shape[-1]) * spec.eta
    if spec.kind == "shannon":
        values = logsumexp(flat, axis=1)
        mu = softmax(flat, axis=1)
    else:
        mu = maximizer_rows(spec.kind, spec.alpha, flat, cfg)
        values = inner_rows(mu, flat) - value_rows(spec.kind, spec.alpha, mu)
    return (values / spec.eta).reshape(shape[:-1]), mu.reshape(shape)


def minimize_on_simplex(
    objective: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    K: int,
    start: Optional[np.ndarray] = None,
    gtol: float = 1e-12,
    max_iterations: int = 2000,
) -> Tuple[float, np.ndarray]:
    """Minimize a smooth function over the K-simplex.

    Optimizes over z with mu = softmax(z); the chain rule through the softmax
    Jacobian diag(mu) - mu mu^T gives the gradient in z.

    Returns:
        Tuple of the minimum value and the minimizer
    """
    if K == 1:
        mu = np.ones(1)
        return float(objective(mu)), mu
    if start is None:
        z0 = np.zeros(K)
    else:
        z0 = np.log(np.maximum(np.asarray(start, dtype=float), _TINY))
        z0 -= z0.max()

    def fun(z):
        mu = softmax(z)
        g = gradient(np.maximum(mu, _TINY))
        return float(objective(mu)), mu * (g - np.dot(mu, g))

    result = minimize(
        fun, z0, jac=True, method="BFGS", options={"gtol": gtol, "maxiter": max_iterations}
    )
    if not np.isfinite(result.fun):
        raise DualSolverError(
            f"simplex minimization produced a non-finite value: {result.message}",
            best_value=result.fun,
            best_point=softmax(result.x),
        )
    if not result.success:
        logger.debug(f"BFGS stopped early ({result.message}); value {result.fun:.12g}")
    return float(result.fun), softmax(result.x)


def generic_dual(spec: EntropySpec, v: np.ndarray) -> Tuple[float, np.ndarray]:
    """Entropic dual of a single vector through the generic simplex minimizer."""
    v = np.asarray(v, dtype=float) * spec.eta
    K = v.shape[0]
    value, mu = minimize_on_simplex(
        lambda m: float(value_rows(spec.kind, spec.alpha, m)) - float(np.dot(m, v)),
        lambda m: grad_rows(spec.kind, spec.alpha, m) - v,
        K,
        start=softmax(v),
    )
    return -value / spec.eta, mu


def certify_on_grid(
    spec: EntropySpec, v: np.ndarray, value: float, cfg: DualEvalConfig
) -> float:
    """Check a dual value against a dense simplex grid.

    Returns:
        float: How much the best grid point falls below the value (>= 0 when certified)

    Raises:
        DualSolverError: If a grid point beats the value by more than the tolerance
    """
    v = np.asarray(v, dtype=float)
    grid = grid_array(v.shape[0], cfg.fallback_grid_resolution)
    candidates = (grid @ v) - value_rows(spec.kind, spec.alpha, grid) / spec.eta
    best = int(np.argmax(candidates))
    margin = value - float(candidates[best])
    if margin < -cfg.tolerance * max(1.0, abs(value)):
        raise DualSolverError(
            f"grid point beats the dual value of {spec.label} by {-margin:.3e}",
            best_value=float(candidates[best]),
            best_point=grid[best],
        )
    return margin
