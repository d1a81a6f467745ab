"""
Tests for M(eta), the mixability constant and the optimal regret bound.

All searches here run on the reduced grids of the ``small_search`` fixture.
"""
import math

import numpy as np
import pytest

from mistura.core.mixability import (
    BracketError,
    M,
    MixabilitySearch,
    UndefinedRegretError,
    analyze,
    dominance,
    entropic_mixability_gap,
    optimal_regret,
    scan_M,
)
from mistura.core.mixability.mix import MixabilityError
from mistura.core.models.entropy import EntropySpec
from mistura.core.models.loss import LossSpec


def test_log_loss_shannon_crossing(shannon, log_loss, small_search):
    assert M(1.0, shannon, log_loss, small_search) == pytest.approx(0.0, abs=1e-6)
    assert M(1.5, shannon, log_loss, small_search) < -1e-3
    assert M(0.5, shannon, log_loss, small_search) >= -1e-6


def test_log_loss_shannon_constant(shannon, log_loss, small_search):
    report = analyze(shannon, log_loss, small_search)

    assert report.status == "bracketed"
    assert report.eta_star == pytest.approx(1.0, abs=0.02)
    assert report.regret == pytest.approx(math.log(2), rel=0.03)
    assert report.regret_uniform == pytest.approx(math.log(2) / report.eta_star)
    assert report.regret_gap == pytest.approx(0.0, abs=1e-9)
    assert report.samples[0][0] == small_search.eta_lo
    assert report.grid["coarse_rows"] == 11**3

    ordered = sorted(report.samples)
    for (_, value), (_, later) in zip(ordered, ordered[1:]):
        assert later <= value
    raw = MixabilitySearch(shannon, log_loss, cfg=small_search)
    for eta, value in report.samples[:3]:
        assert value <= raw.M(eta)


def test_scan_is_non_increasing(tsallis, log_loss, small_search):
    etas = [0.5, 0.9, 1.5, 3.0]
    values = scan_M(etas, tsallis, log_loss, small_search)
    assert len(values) == len(etas)
    for earlier, later in zip(values, values[1:]):
        assert later <= earlier + 1e-6
    assert values[-1] < -1e-3


def test_bracket_checked(shannon, log_loss, small_search):
    search = MixabilitySearch(shannon, log_loss, cfg=small_search)
    with pytest.raises(BracketError):
        search.eta_star(eta_lo=2.0, eta_hi=1.0)
    with pytest.raises(BracketError):
        search.eta_star(eta_lo=0.0, eta_hi=1.0)
    with pytest.raises(MixabilityError):
        search.evaluate(-1.0)


def test_narrow_bracket_reports_status(shannon, log_loss, small_search):
    search = MixabilitySearch(shannon, log_loss, cfg=small_search)
    assert search.eta_star(eta_lo=2.0, eta_hi=4.0).status == "not_mixable"
    above = search.eta_star(eta_lo=0.1, eta_hi=0.5)
    assert above.status == "lower_bound"
    assert above.eta_star == 0.5


def test_squared_loss_is_not_quadratic_mixable(quadratic, small_search):
    squared = LossSpec(kind="squared")
    report = analyze(quadratic, squared, small_search)

    assert report.status == "not_mixable"
    assert report.eta_star == 0.0
    assert report.regret is None
    assert report.cell == "—(0)"
    # The violation shrinks as eta falls but never closes
    for value in scan_M(np.geomspace(1e-3, 1e3, 13), quadratic, squared, small_search):
        assert value < -small_search.mixable_tolerance

    with pytest.raises(UndefinedRegretError):
        optimal_regret(quadratic, squared, small_search)


def test_squared_loss_is_tsallis_mixable(tsallis, small_search):
    report = analyze(tsallis, LossSpec(kind="squared"), small_search)
    assert report.status == "bracketed"
    assert report.eta_star > 0.0
    assert report.regret > 0.0


def test_constant_loss_is_mixable_everywhere(shannon, small_search):
    cfg = small_search.model_copy(update={"eta_hi": 10.0})
    report = analyze(shannon, LossSpec(kind="constant", level=0.3), cfg)
    assert report.status == "lower_bound"
    assert report.eta_star == 10.0
    assert report.cell == "0.06931 (10+)"


def test_entropic_gap(shannon, tsallis, small_search):
    # A proper loss is mixable for its own entropy
    assert entropic_mixability_gap(tsallis, tsallis, small_search) <= 1e-3
    # Log loss is not mixable for H/2
    assert entropic_mixability_gap(shannon, shannon.scaled(2.0), small_search) > 0.1


@pytest.mark.parametrize(
    "F",
    [
        EntropySpec(kind="shannon"),
        EntropySpec(kind="tsallis", alpha=-0.5),
        EntropySpec(kind="renyi", alpha=-0.5),
    ],
    ids=lambda F: F.label,
)
def test_entropic_gap_sign_agrees_with_M(F, small_search):
    loss = LossSpec(kind="proper", entropy=F)

    # Matched scale: the proper loss of F is F-mixable, both forms sit at zero
    gap = entropic_mixability_gap(F, F, small_search)
    assert gap <= 1e-3
    assert M(1.0, F, loss, small_search) >= -1e-3

    # Twice the learning rate breaks mixability in both forms
    doubled = F.scaled(2.0)
    assert entropic_mixability_gap(F, doubled, small_search) > 1e-4
    assert M(1.0, doubled, loss, small_search) < -1e-4


def test_entropic_gap_needs_a_proper_loss(shannon, log_loss, small_search):
    with pytest.raises(MixabilityError):
        MixabilitySearch(shannon, log_loss, cfg=small_search).entropic_gap()


def test_dominance_of_an_entropy_with_itself(shannon, log_loss, small_search):
    report = dominance(shannon, shannon, log_loss, small_search)
    assert report.relation == "="
    assert report.regret_phi == report.regret_psi


def test_entropy_dimension_must_match_experts(log_loss, small_search):
    with pytest.raises(MixabilityError):
        MixabilitySearch(EntropySpec(kind="shannon", dim=3), log_loss, 2, small_search)
