"""Row-wise formulas of the four entropy families at unit scale."""

import numpy as np
from scipy.special import xlogy


def value_rows(kind: str, alpha, P: np.ndarray) -> np.ndarray:
    """Entropy values of each row of P (0 log 0 := 0)."""
    P = np.asarray(P, dtype=float)
    if kind == "shannon":
        return xlogy(P, P).sum(axis=-1)
    if kind == "quadratic":
        K = P.shape[-1]
        return np.square(P - 1.0 / K).sum(axis=-1)
    power_sum = np.power(P, alpha + 1.0).sum(axis=-1)
    if kind == "tsallis":
        return (power_sum - 1.0) / alpha
    if kind == "renyi":
        return np.log(power_sum) / alpha
    raise ValueError(f"unknown entropy kind {kind!r}")


def grad_rows(kind: str, alpha, P: np.ndarray) -> np.ndarray:
    """Gradients of each row of P; Legendre families return inf on zero coordinates."""
    P = np.asarray(P, dtype=float)
    with np.errstate(divide="ignore"):
        if kind == "shannon":
            return np.log(P) + 1.0
        if kind == "quadratic":
            K = P.shape[-1]
            return 2.0 * (P - 1.0 / K)
        scaled = (alpha + 1.0) / alpha * np.power(P, alpha)
        if kind == "tsallis":
            return scaled
        if kind == "renyi":
            power_sum = np.power(P, alpha + 1.0).sum(axis=-1, keepdims=True)
            return scaled / power_sum
    raise ValueError(f"unknown entropy kind {kind!r}")
