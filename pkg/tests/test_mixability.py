"""
Tests for the Mix bound and its best-response witness.
"""
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mistura.core.mixability import find_best_response, mix_dual, mix_inf
from mistura.core.models.entropy import EntropySpec
from mistura.core.models.loss import ExpertPredictionSet, LossSpec
from mistura.core.models.simplex import ProbVector
from mistura.core.simplex import DimensionMismatchError, uniform

A = ExpertPredictionSet.from_array([[0.9, 0.1], [0.4, 0.6]])
MU = ProbVector(weights=(0.3, 0.7))


def random_mix_case(rng: np.random.Generator):
    """A seeded (entropy, loss, predictions, mixture, outcome) tuple.

    Quadratic cases keep mild losses and a central mixture so the constrained
    minimizer stays in the interior.
    """
    kind = str(rng.choice(["shannon", "tsallis", "renyi", "quadratic"]))
    if kind == "quadratic":
        phi = EntropySpec(kind="quadratic", eta=float(rng.uniform(0.5, 1.0)))
        a = rng.uniform(0.4, 0.6, size=2)
        A = ExpertPredictionSet.from_array(np.column_stack([a, 1.0 - a]))
        m = float(rng.uniform(0.35, 0.65))
        mu = ProbVector(weights=(m, 1.0 - m))
        return phi, LossSpec(kind="squared"), A, mu, int(rng.integers(2))

    K = int(rng.choice([2, 3]))
    X = int(rng.choice([2, 3]))
    alpha = float(rng.uniform(-0.9, -0.1)) if kind != "shannon" else None
    eta = float(np.exp(rng.uniform(math.log(0.3), math.log(3.0))))
    phi = EntropySpec(kind=kind, alpha=alpha, eta=eta)
    loss = LossSpec(kind=str(rng.choice(["log", "squared"])), outcomes=X)
    A = ExpertPredictionSet.from_array(0.05 + (1.0 - 0.05 * X) * rng.dirichlet(np.ones(X), size=K))
    mu = ProbVector.from_array(0.05 + (1.0 - 0.05 * K) * rng.dirichlet(np.ones(K)))
    return phi, loss, A, mu, int(rng.integers(X))


def worst_form_gap(cases: int, seed: int) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        phi, loss, A, mu, x = random_mix_case(rng)
        dual = mix_dual(phi, loss, A, mu, x)
        primal = mix_inf(phi, loss, A, mu, x)
        worst = max(worst, abs(dual - primal) / max(1.0, abs(dual)))
    return worst


def test_dual_form_matches_infimum_form_on_random_games():
    assert worst_form_gap(50, seed=11) <= 1e-6


@pytest.mark.slow
def test_dual_form_matches_infimum_form_on_many_random_games():
    assert worst_form_gap(1000, seed=12) <= 1e-6


@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
def test_shannon_mix_is_the_exponential_mixture(eta):
    phi = EntropySpec(kind="shannon", eta=eta)
    loss = LossSpec(kind="squared")
    losses = np.array([[0.02, 0.72], [1.62, 0.32]])  # squared losses of A, one row per outcome
    for x in (0, 1):
        expected = -math.log(np.dot(MU.weights, np.exp(-eta * losses[x]))) / eta
        assert mix_dual(phi, loss, A, MU, x) == pytest.approx(expected, abs=1e-10)


def test_log_loss_mixture_is_the_exact_witness():
    phi = EntropySpec(kind="shannon")
    response = find_best_response(phi, LossSpec(kind="log"), A, MU)

    assert response.slack == pytest.approx(0.0, abs=1e-9)
    assert response.certifies(1e-9)
    assert_allclose(response.prediction.weights, [0.55, 0.45], atol=1e-6)
    assert_allclose(response.mix, [-math.log(0.55), -math.log(0.45)], atol=1e-10)


def test_best_response_mix_agrees_with_dual_form():
    phi = EntropySpec(kind="tsallis", alpha=-0.5)
    loss = LossSpec(kind="proper", entropy=phi)
    response = find_best_response(phi, loss, A, MU)
    for x in (0, 1):
        assert response.mix[x] == pytest.approx(mix_dual(phi, loss, A, MU, x), abs=1e-10)
    # The matched pair is mixable at unit scale
    assert response.slack >= -1e-6


def test_too_large_eta_leaves_negative_slack():
    phi = EntropySpec(kind="shannon", eta=2.0)
    extreme = ExpertPredictionSet.from_array([[0.99, 0.01], [0.01, 0.99]])
    response = find_best_response(phi, LossSpec(kind="log"), extreme, uniform(2))
    assert response.slack < -0.1
    assert not response.certifies(1e-6)


def test_dimension_mismatches_rejected():
    phi = EntropySpec(kind="shannon")
    with pytest.raises(DimensionMismatchError):
        mix_dual(phi, LossSpec(kind="log"), A, uniform(3), 0)
    with pytest.raises(DimensionMismatchError):
        mix_dual(phi, LossSpec(kind="log", outcomes=3), A, MU, 0)
    with pytest.raises(DimensionMismatchError):
        find_best_response(phi.with_dim(3), LossSpec(kind="log"), A, MU)
