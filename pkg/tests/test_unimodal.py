import math
import time

import numpy as np
import pytest

from rro.errors import DomainError, NotUnimodalError
from rro.invariants import check_plan
from rro.iterative_solver import iterative_solve
from rro.score_model import (
    BudgetSpec,
    EmpiricalComplement,
    ExponentialComplement,
    LogNormalComplement,
    PiecewiseLinearComplement,
    SupportedSet,
)
from rro.unimodal import (
    solve_chord_tangency,
    solve_decreasing,
    solve_unimodal,
    tangency_threshold,
    unimodal_profile,
)

from conftest import YOUTUBE_SCORES


@pytest.mark.parametrize("rate", [0.5, 0.8, 2.0])
def test_youtube_example_for_any_decreasing_density(rate):
    start = time.perf_counter()
    plan = solve_decreasing(SupportedSet.from_scores(YOUTUBE_SCORES), BudgetSpec(10000), ExponentialComplement(rate))
    assert time.perf_counter() - start < 1.0
    assert plan.assignments.added.tolist() == pytest.approx([3475, 3075, 2875, 575, 0], abs=1e-6)
    assert plan.budget_used == pytest.approx(10000)
    assert plan.solver == "unimodal"


@pytest.mark.parametrize("scores, budget, expected", [([5], 3, [8]), ([1, 2], 1, [2, 2])])
def test_decreasing_small_cases(scores, budget, expected):
    plan = solve_decreasing(SupportedSet.from_scores(scores), budget)
    assert plan.assignments.reinforced.tolist() == expected


def test_fast_path_delegates_for_a_decreasing_density(youtube):
    supported, model = youtube
    fast = solve_unimodal(supported, model, 10000)
    direct = solve_decreasing(supported, 10000, model)
    assert fast.assignments.pairs() == direct.assignments.pairs()


def test_zero_budget_is_the_identity():
    supported = SupportedSet.from_scores([0.5, 3.0])
    plan = solve_unimodal(supported, LogNormalComplement(0, 1), 0)
    assert plan.budget_used == 0
    assert plan.assignments.pairs() == [(0.5, 0.5), (3.0, 3.0)]


def test_profiles():
    assert unimodal_profile(ExponentialComplement(2.0)).mode == 0
    profile = unimodal_profile(LogNormalComplement(0, 1))
    assert profile.mode == pytest.approx(math.exp(-1))
    assert profile.density_at_mode == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi) * math.e)
    for model in (EmpiricalComplement([1, 2]), PiecewiseLinearComplement([(0, 0), (1, 1)])):
        with pytest.raises(NotUnimodalError, match="iterative_solve"):
            unimodal_profile(model)


def test_tangency_beyond_the_threshold_is_zero():
    assert solve_chord_tangency(LogNormalComplement(0, 1), 3.0) == 0.0
    assert solve_chord_tangency(ExponentialComplement(0.8), 5.0) == 0.0


def test_tangency_below_the_threshold_meets_the_cdf_again():
    model = LogNormalComplement(0, 1)
    h = 0.6
    l = solve_chord_tangency(model, h)
    assert 0 < l < model.mode
    tangent = model.cdf(h) + model.pdf(h) * (l - h)
    assert model.cdf(l) == pytest.approx(tangent, abs=1e-9)


def test_tangency_requires_h_above_the_mode():
    with pytest.raises(DomainError):
        solve_chord_tangency(LogNormalComplement(0, 1), 0.2)


def test_lognormal_threshold():
    # the tangent at h passes through the origin when Phi(ln h) = phi(ln h)
    h_star = tangency_threshold(LogNormalComplement(0, 1))
    assert h_star == pytest.approx(0.739, abs=0.01)
    assert solve_chord_tangency(LogNormalComplement(0, 1), h_star * 1.01) == 0.0
    assert solve_chord_tangency(LogNormalComplement(0, 1), h_star * 0.99) > 0.0


def test_lognormal_agrees_with_the_general_path():
    supported = SupportedSet.from_scores([0.5, 3.0])
    model = LogNormalComplement(0, 1)
    fast = solve_unimodal(supported, model, 0.2)
    general = iterative_solve(supported, model, 0.2, epsilon=1e-10)
    assert fast.utility_after == pytest.approx(general.utility_after, abs=1e-6)
    assert check_plan(supported, model, fast) == []


def test_random_unimodal_instances_agree_with_the_general_path():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        if rng.random() < 0.5:
            model = ExponentialComplement(float(rng.uniform(0.2, 3.0)))
        else:
            model = LogNormalComplement(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.4, 1.5)))
        supported = SupportedSet.from_scores(np.round(rng.uniform(0.05, 5.0, size=n), 3))
        budget = float(np.round(rng.uniform(0.0, 2.0 * n), 3))
        fast = solve_unimodal(supported, model, budget)
        general = iterative_solve(supported, model, budget, epsilon=1e-10 * model.peak_density)
        assert fast.utility_after == pytest.approx(general.utility_after, abs=1e-6)
        assert fast.budget_used <= budget * (1 + 1e-9) + 1e-9
        if not fast.collinear:
            assert fast.budget_used == pytest.approx(budget, rel=1e-9, abs=1e-12)
