"""
Tests for the entropic dual solvers.
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import logsumexp

from mistura.core.entropies import (
    DualSolverError,
    dual_grad,
    entropic_dual,
    generic_dual,
    grad,
    grad_array,
    solve_rows,
    validate_dual_solver,
    value,
    value_array,
)
from mistura.core.entropies.dual_solver import certify_on_grid
from mistura.core.models.entropy import DualEvalConfig, EntropySpec
from mistura.core.models.simplex import DualVector, ProbVector

FAMILIES = [
    EntropySpec(kind="shannon"),
    EntropySpec(kind="quadratic"),
    EntropySpec(kind="tsallis", alpha=-0.5),
    EntropySpec(kind="tsallis", alpha=0.5),
    EntropySpec(kind="renyi", alpha=-0.5),
    EntropySpec(kind="renyi", alpha=-0.9),
    EntropySpec(kind="tsallis", alpha=-0.5, eta=3.0),
]


def random_duals(K: int, n: int, scale: float, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-scale, scale, size=(n, K))


def test_shannon_dual_is_log_sum_exp():
    v = DualVector(values=(0.3, -1.2, 2.5))
    assert entropic_dual(EntropySpec(kind="shannon"), v) == pytest.approx(
        logsumexp([0.3, -1.2, 2.5]), abs=1e-12
    )
    # Scale: (Phi / eta)*(v) = Phi*(eta v) / eta
    scaled = entropic_dual(EntropySpec(kind="shannon", eta=2.0), v)
    assert scaled == pytest.approx(logsumexp([0.6, -2.4, 5.0]) / 2.0, abs=1e-12)


def test_quadratic_dual_matches_brute_force_grid():
    phi = EntropySpec(kind="quadratic")
    v = np.array([0.1, -0.1])
    q = np.linspace(0.0, 1.0, 100_001)
    P = np.stack([q, 1.0 - q], axis=1)
    brute = np.max(P @ v - np.square(P - 0.5).sum(axis=1))
    assert entropic_dual(phi, DualVector(values=(0.1, -0.1))) == pytest.approx(brute, abs=1e-6)


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda phi: phi.label)
def test_translation_invariance(phi):
    V = random_duals(3, 1000, 5.0, seed=1)
    values, _ = solve_rows(phi, V)
    shifted, _ = solve_rows(phi, V + 1.7)
    assert_allclose(shifted, values + 1.7, atol=1e-8)


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda phi: phi.label)
def test_scaling_rescales_the_dual(phi):
    V = random_duals(3, 1000, 5.0, seed=2)
    eta = 0.37
    scaled, _ = solve_rows(phi.scaled(eta), V)
    direct, _ = solve_rows(phi, V * eta)
    assert_allclose(scaled, direct / eta, atol=1e-8)


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda phi: phi.label)
def test_fenchel_young_attainment(phi):
    V = random_duals(3, 1000, 5.0, seed=3)
    values, mu = solve_rows(phi, V)
    assert_allclose(mu.sum(axis=1), 1.0, atol=1e-12)
    attained = (mu * V).sum(axis=1) - value_array(phi, mu)
    assert_allclose(attained, values, atol=1e-8)
    for row in mu[:20]:
        assert value(phi, ProbVector.from_array(row)) == pytest.approx(
            float(value_array(phi, row)), abs=1e-12
        )


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda phi: phi.label)
def test_gradient_and_dual_gradient_invert(phi):
    rng = np.random.default_rng(4)
    for _ in range(50):
        mu = ProbVector.from_array(0.02 + rng.dirichlet(np.ones(3)))
        recovered = dual_grad(phi, grad(phi, mu))
        assert_allclose(recovered.weights, mu.weights, atol=1e-7)

    P = 0.02 + rng.dirichlet(np.ones(3), size=1000)
    P /= P.sum(axis=1, keepdims=True)
    _, recovered = solve_rows(phi, grad_array(phi, P))
    assert_allclose(recovered, P, atol=1e-7)


@pytest.mark.parametrize(
    "phi",
    [
        EntropySpec(kind="shannon"),
        EntropySpec(kind="tsallis", alpha=-0.5),
        EntropySpec(kind="renyi", alpha=-0.5),
        EntropySpec(kind="renyi", alpha=-0.9),
    ],
    ids=lambda phi: phi.label,
)
def test_exact_solver_matches_generic_minimizer(phi):
    V = random_duals(3, 20, 3.0, seed=6)
    values, _ = solve_rows(phi, V)
    for v, exact in zip(V, values):
        reference, _ = generic_dual(phi, v)
        assert exact == pytest.approx(reference, abs=1e-6)


@pytest.mark.parametrize("phi", FAMILIES[:6], ids=lambda phi: phi.label)
def test_dual_values_certified_on_grid(phi):
    cfg = DualEvalConfig(fallback_grid_resolution=200)
    for v in random_duals(3, 10, 4.0, seed=7):
        exact = entropic_dual(phi, DualVector.from_array(v), cfg, certify=False)
        assert certify_on_grid(phi, v, exact, cfg) >= -1e-9


def test_certification_rejects_a_wrong_value():
    phi = EntropySpec(kind="tsallis", alpha=-0.5)
    cfg = DualEvalConfig(fallback_grid_resolution=100)
    v = np.array([1.0, -1.0])
    exact = entropic_dual(phi, DualVector.from_array(v), cfg)
    with pytest.raises(DualSolverError) as excinfo:
        certify_on_grid(phi, v, exact - 0.1, cfg)
    assert excinfo.value.best_point is not None


def test_non_convergence_raises_with_best_guess():
    phi = EntropySpec(kind="tsallis", alpha=-0.5)
    cfg = DualEvalConfig(max_iterations=1)
    with pytest.raises(DualSolverError) as excinfo:
        solve_rows(phi, np.array([[3.0, -2.0, 0.5]]), cfg)
    assert excinfo.value.best_point.shape == (1, 3)
    assert np.isfinite(excinfo.value.best_value).all()


def test_non_finite_dual_vectors_rejected():
    with pytest.raises(DualSolverError):
        solve_rows(EntropySpec(kind="renyi", alpha=-0.5), np.array([[0.0, math.inf]]))


def test_extreme_dual_vectors_stay_finite():
    V = np.array([[800.0, -800.0], [-1e4, 0.0], [0.0, 0.0]])
    for phi in FAMILIES:
        values, mu = solve_rows(phi, V)
        assert np.isfinite(values).all()
        assert_allclose(mu.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize(
    "phi, tolerance",
    [
        (EntropySpec(kind="shannon"), 1e-9),
        (EntropySpec(kind="tsallis", alpha=-0.5), 1e-6),
        (EntropySpec(kind="renyi", alpha=-0.5), 1e-6),
    ],
    ids=["H", "S_-0.5", "R_-0.5"],
)
def test_validate_dual_solver(phi, tolerance):
    report = validate_dual_solver(phi, K=2, samples=40, seed=11)
    assert report.samples == 40
    assert report.max_reference_error <= tolerance
    assert report.max_grid_shortfall <= 1e-6


@pytest.mark.parametrize("K", [2, 3, 5])
def test_shannon_solver_matches_log_sum_exp_on_wide_duals(K):
    shannon = EntropySpec(kind="shannon")
    report = validate_dual_solver(shannon, K=K, samples=1000, scale=20.0, seed=5)
    assert report.samples == 1000
    assert report.max_reference_error <= 1e-8
    assert report.max_grid_shortfall <= 1e-6


@pytest.mark.slow
@pytest.mark.parametrize(
    "phi",
    [EntropySpec(kind="tsallis", alpha=-0.5), EntropySpec(kind="renyi", alpha=-0.5)],
    ids=lambda phi: phi.label,
)
def test_validate_dual_solver_on_many_duals(phi):
    report = validate_dual_solver(phi, K=3, samples=1000, scale=3.0, seed=13)
    assert report.max_reference_error <= 1e-6
    assert report.max_grid_shortfall <= 1e-6
