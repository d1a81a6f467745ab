"""
Probability-simplex primitives.

Vectors, lattice grids, interior clamping and Euclidean projection shared by
the entropy, loss and mixability modules. The array helpers work row-wise on
``(n, K)`` arrays; the public operations take and return model objects.
"""

from functools import lru_cache
from typing import List

import numpy as np

from mistura.core.models.simplex import DualVector, ProbVector


class SimplexError(ValueError):
    """Base exception for simplex primitive errors."""

    pass


class InvalidDimensionError(SimplexError):
    """Exception raised when a simplex dimension is too small."""

    pass


class SimplexIndexError(SimplexError, IndexError):
    """Exception raised when a vertex index is outside the simplex."""

    pass


class DimensionMismatchError(SimplexError):
    """Exception raised when two vectors live on simplices of different size."""

    pass


def uniform(K: int) -> ProbVector:
    """Uniform distribution on the K-simplex."""
    if K < 2:
        raise InvalidDimensionError(f"uniform requires K >= 2, got {K}")
    return ProbVector(weights=tuple([1.0 / K] * K))


def dirac(K: int, theta: int) -> ProbVector:
    """Vertex delta_theta of the K-simplex."""
    if K < 1:
        raise InvalidDimensionError(f"dirac requires K >= 1, got {K}")
    if not 0 <= theta < K:
        raise SimplexIndexError(f"vertex {theta} is outside a simplex of dimension {K}")
    weights = [0.0] * K
    weights[theta] = 1.0
    return ProbVector(weights=tuple(weights))


def inner(mu: ProbVector, v: DualVector) -> float:
    """Inner product <mu, v>."""
    if mu.dim != v.dim:
        raise DimensionMismatchError(
            f"cannot pair a {mu.dim}-dimensional mixture with a {v.dim}-dimensional dual vector"
        )
    return float(np.dot(mu.as_array(), v.as_array()))


@lru_cache(maxsize=1024)
def _compositions(K: int, total: int) -> np.ndarray:
    """Integer compositions of ``total`` into K parts, lexicographic order."""
    if K == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total + 1):
        rest = _compositions(K - 1, total - first)
        head = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def lattice(K: int, resolution: int) -> np.ndarray:
    """Integer lattice points of the simplex grid as an ``(n, K)`` array."""
    if K < 1:
        raise InvalidDimensionError(f"simplex grids require K >= 1, got {K}")
    if resolution < 1:
        raise ValueError(f"grid resolution must be positive, got {resolution}")
    points = _compositions(K, resolution)
    points.flags.writeable = False
    return points


def grid_array(K: int, resolution: int, interior_margin: float = 0.0) -> np.ndarray:
    """Simplex grid as a float array, rows in lexicographic order."""
    if resolution < 2:
        raise ValueError(f"grid resolution must be at least 2, got {resolution}")
    if not 0.0 <= interior_margin < 1.0 / K:
        raise ValueError(f"interior margin {interior_margin} outside [0, 1/{K})")
    points = lattice(K, resolution) / float(resolution)
    if interior_margin > 0.0:
        points = clamp_rows(points, interior_margin)
    return points


def simplex_grid(K: int, resolution: int, interior_margin: float = 0.0) -> List[ProbVector]:
    """All points of the lattice {i/resolution} on the K-simplex.

    Coordinates are clamped to at least ``interior_margin`` and renormalized.

    Args:
        K: Simplex dimension
        resolution: Number of lattice steps per coordinate
        interior_margin: Lower bound applied to every coordinate

    Returns:
        List[ProbVector]: Grid points in lexicographic order of their compositions
    """
    return [ProbVector.from_array(row) for row in grid_array(K, resolution, interior_margin)]


def clamp_rows(points: np.ndarray, epsilon: float) -> np.ndarray:
    """Row-wise interior clamp; rows already inside are returned untouched."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    needs = (points < epsilon).any(axis=1)
    if not needs.any():
        return points
    out = points.copy()
    clamped = np.maximum(points[needs], epsilon)
    out[needs] = clamped / clamped.sum(axis=1, keepdims=True)
    return out


def clamp_interior(mu: ProbVector, epsilon: float) -> ProbVector:
    """Raise every coordinate to at least ``epsilon`` and renormalize.

    Identity on points whose coordinates are all at least ``epsilon``.
    """
    if not 0.0 < epsilon < 1.0 / mu.dim:
        raise ValueError(f"clamp epsilon {epsilon} outside (0, 1/{mu.dim})")
    if min(mu.weights) >= epsilon:
        return mu
    return ProbVector.from_array(clamp_rows(mu.as_array(), epsilon)[0])


def project_rows(y: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the simplex (sort-based)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    n, K = y.shape
    u = -np.sort(-y, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, K + 1)
    cond = u - css / ind > 0
    rho = K - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(n), rho] / (rho + 1.0)
    return np.maximum(y - tau[:, None], 0.0)


def project_simplex(y: DualVector) -> ProbVector:
    """Euclidean projection of an arbitrary vector onto the simplex."""
    return ProbVector.from_array(project_rows(y.as_array())[0])


def inner_rows(mu: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...k,...k->...", mu, v)
