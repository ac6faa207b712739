import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rro.basic_solver import (
    COLLINEAR_TARGET,
    BasicSolver,
    basic_solve,
    budget_curve,
    candidate_targets,
    trace,
)
from rro.errors import DomainError, EmptySetError
from rro.invariants import check_alpha_solution
from rro.score_model import (
    EmpiricalComplement,
    ExponentialComplement,
    LogNormalComplement,
    PiecewiseLinearComplement,
    SegmentList,
    SupportedSet,
)

from conftest import WORKED_COMPLEMENT


# --- candidate targets ---

def test_exponential_candidate_is_where_the_density_equals_alpha():
    assert candidate_targets(ExponentialComplement(1.0), 0.5).scores == pytest.approx((math.log(2),))
    assert len(candidate_targets(ExponentialComplement(1.0), 2.0)) == 0


def test_empirical_candidates_are_every_step_highest_first():
    model = EmpiricalComplement(WORKED_COMPLEMENT["200"])
    for alpha in (1e-4, 0.01, 3.0):
        assert candidate_targets(model, alpha).scores == (220, 200, 100, 80, 60, 35, 24, 10)


def test_lognormal_candidate_lies_above_the_mode():
    model = LogNormalComplement(0.0, 1.0)
    (x,) = candidate_targets(model, 0.2).scores
    assert x > model.mode
    assert model.pdf(x) == pytest.approx(0.2)
    assert len(candidate_targets(model, model.peak_density * 1.01)) == 0


def test_piecewise_candidates_are_knots_where_the_slope_drops_through_alpha():
    model = PiecewiseLinearComplement([(0, 0), (10, 0.8), (20, 1.0)])
    assert candidate_targets(model, 0.05).scores == (10.0,)
    assert candidate_targets(model, 0.01).scores == (20.0,)


def test_candidate_targets_rejects_non_positive_alpha():
    with pytest.raises(DomainError):
        candidate_targets(ExponentialComplement(1.0), 0.0)


# --- trace ---

@pytest.mark.parametrize("alpha, expected", [(0.2, 5.0), (0.05, 0.0)])
def test_trace_single_atom(alpha, expected):
    model = EmpiricalComplement([10])
    assert trace(model, SupportedSet.from_scores([1]), alpha, 10) == pytest.approx(expected)


def test_trace_uses_the_highest_qualifying_step(micro):
    supported, model = micro
    assert trace(model, supported, 0.06, 20) == pytest.approx(20 - 10 * 0.05 / 0.06)


def test_trace_rejects_non_positive_score(micro):
    supported, model = micro
    with pytest.raises(DomainError):
        trace(model, supported, 0.06, 0)


def test_analytic_trace_is_zero_for_a_concave_cdf():
    model = ExponentialComplement(1.0)
    assert trace(model, SupportedSet.from_scores([0.1]), 0.5, math.log(2)) == 0.0


# --- basic_solve on the micro instance ---

def test_low_gradient_swallows_everything(micro):
    supported, model = micro
    sol = basic_solve(supported, model, 0.04)
    assert sol.plan.pairs() == [(5, 20), (12, 20)]
    assert sol.targets == (20,)
    assert [(s.low, s.high) for s in sol.segments] == [(0, 20)]
    assert sol.budget_used == 23
    assert sol.next_alpha == 0
    assert sol.saturated


def test_two_targets(micro):
    supported, model = micro
    sol = basic_solve(supported, model, 0.06)
    assert sol.plan.pairs() == [(5, 10), (12, 20)]
    assert sol.targets == (20, 10)
    assert sol.segments[0].low == pytest.approx(20 - 0.5 / 0.06)
    assert (sol.segments[1].low, sol.segments[1].high) == (0, 10)
    assert sol.budget_used == 13
    assert sol.collinear == {}
    assert sol.next_alpha == pytest.approx(0.05)


def test_trace_landing_on_a_step_is_collinear(micro):
    supported, model = micro
    sol = basic_solve(supported, model, 0.05)
    assert sol.plan.pairs() == [(5, 10), (12, 20)]
    assert sol.budget_used == 13
    assert sol.collinear == {10.0: COLLINEAR_TARGET}
    route = sol.routes[10.0]
    assert route.higher == 20
    assert route.count == 1
    assert sol.capacity == 10


def test_entry_on_a_chord_is_left_in_place(micro):
    supported, model = micro
    # 12 sits exactly on the chord of slope 1/16 through (20, 1)
    sol = basic_solve(supported, model, 0.0625)
    assert sol.plan.pairs() == [(5, 10), (12, 12)]
    assert sol.collinear == {12.0: "collinear-source"}
    assert sol.capacity == 8


def test_basic_solve_errors(micro):
    supported, model = micro
    with pytest.raises(DomainError):
        basic_solve(supported, model, -1)
    with pytest.raises(EmptySetError):
        BasicSolver(SupportedSet(np.array([])), model)


def test_budget_curve_is_sorted_by_alpha_descending(micro):
    supported, model = micro
    rows = budget_curve(supported, model, [0.04, 0.06])
    assert rows[0][:2] == (0.06, 13)
    assert rows[0][2] == pytest.approx(0.05)
    assert rows[1] == (0.04, 23, 0)
    single = budget_curve(supported, model, [0.05])
    assert single[0][1] == basic_solve(supported, model, 0.05).budget_used


def test_worked_example_solutions_satisfy_chord_postconditions(worked_example):
    supported, model = worked_example
    for alpha in np.geomspace(1e-4, 1.0, 60):
        sol = basic_solve(supported, model, float(alpha))
        assert check_alpha_solution(supported, model, sol) == []


def test_analytic_single_target_saturates():
    supported = SupportedSet.from_scores([1.0, 2.0])
    sol = basic_solve(supported, ExponentialComplement(1.0), 1e-3)
    assert sol.targets == pytest.approx((math.log(1000),))
    assert sol.plan.reinforced.tolist() == pytest.approx([math.log(1000)] * 2)
    assert sol.next_alpha == 1e-3
    assert not sol.saturated


@pytest.mark.parametrize("alpha", [1e-3, 0.1, 0.3, 0.7])
def test_solution_keeps_the_requested_gradient(micro, alpha):
    supported, model = micro
    assert basic_solve(supported, model, alpha).alpha == alpha
    assert basic_solve(supported, ExponentialComplement(1.0), alpha).alpha == alpha
    assert basic_solve(supported, model, 0.0, log_alpha=math.log(alpha)).alpha == pytest.approx(alpha)


def test_piecewise_saturation_reports_zero_next():
    model = PiecewiseLinearComplement([(0, 0), (10, 1.0)])
    sol = basic_solve(SupportedSet.from_scores([3.0]), model, 0.05)
    assert sol.plan.reinforced.tolist() == [10.0]
    assert sol.saturated
    assert sol.next_alpha == 0


# --- properties on fuzzed exact instances ---

scores = st.lists(st.integers(1, 60), min_size=1, max_size=6)


@given(a=scores, c=scores, alphas=st.lists(st.floats(1e-3, 1.0), min_size=2, max_size=5))
@settings(max_examples=150, deadline=None)
def test_budget_is_monotone_and_segments_nest(a, c, alphas):
    supported, model = SupportedSet.from_scores(a), EmpiricalComplement(c)
    solver = BasicSolver(supported, model)
    sols = [solver.solve(alpha) for alpha in sorted(set(alphas), reverse=True)]
    for high, low in zip(sols, sols[1:]):
        assert low.budget_used >= high.budget_used - 1e-9
        for seg in high.segments:
            assert any(outer.covers(seg, 1e-9) for outer in low.segments)


@given(a=scores, c=scores, alpha=st.floats(1e-3, 1.0))
@settings(max_examples=150, deadline=None)
def test_budget_is_flat_down_to_next_alpha(a, c, alpha):
    supported, model = SupportedSet.from_scores(a), EmpiricalComplement(c)
    solver = BasicSolver(supported, model)
    sol = solver.solve(alpha)
    nxt = sol.next_alpha
    assert nxt <= alpha
    if 0 < nxt < alpha:
        assert solver.solve(0.5 * (nxt + alpha)).budget_used == pytest.approx(sol.budget_used)
        assert solver.solve(nxt * (1 - 1e-6)).budget_used > sol.budget_used


@given(a=scores, c=scores, alpha=st.floats(1e-3, 1.0))
@settings(max_examples=150, deadline=None)
def test_every_exact_solution_passes_the_checker(a, c, alpha):
    supported, model = SupportedSet.from_scores(a), EmpiricalComplement(c)
    sol = basic_solve(supported, model, alpha)
    assert check_alpha_solution(supported, model, sol) == []


def _chord_next_by_scan(solver, sol):
    """Steepest chord from a target down to the highest score strictly above its line."""
    model, alpha = solver.model, sol.alpha
    pts = np.union1d(model.distinct, solver.supported.scores)
    fpts = np.asarray(model.cdf(pts), dtype=float)
    tol = solver.tolerance * (1.0 + alpha * float(model.distinct[-1]))
    best = 0.0
    for x in sol.targets:
        fx = float(model.cdf(x))
        (above,) = np.nonzero((pts < x) & (fpts - alpha * pts > fx - alpha * x + tol))
        if above.size:
            j = above[-1]
            best = max(best, (fx - fpts[j]) / (x - pts[j]))
    return best


@given(
    a=scores,
    c=scores,
    alpha=st.one_of(st.floats(1e-3, 1.0), st.sampled_from([1 / 30, 0.05, 0.0625, 0.1, 0.25, 0.5])),
)
@settings(max_examples=300, deadline=None)
def test_chord_next_matches_a_full_scan(a, c, alpha):
    supported, model = SupportedSet.from_scores(a), EmpiricalComplement(c)
    solver = BasicSolver(supported, model)
    sol = solver.solve(alpha)
    assert isinstance(sol.segments, SegmentList)
    assert sol.chord_next == pytest.approx(_chord_next_by_scan(solver, sol), rel=1e-12, abs=1e-15)


def test_collinear_chord_skips_a_long_run_under_the_line():
    # 700 and 701 are collinear at alpha = 1/m; every score from 699 down to 501
    # lies under that line and the pile at 1 is the first point above it
    c = [1.0] * 10 + [float(s) for s in range(501, 701) for _ in range(2)] + [701.0]
    m = len(c)
    supported, model = SupportedSet.from_scores([0.5]), EmpiricalComplement(c)
    solver = BasicSolver(supported, model)
    sol = solver.solve(1 / m)
    assert sol.collinear[700.0] == COLLINEAR_TARGET
    assert sol.chord_next == pytest.approx(401 / (700 * m))
    assert sol.chord_next == pytest.approx(_chord_next_by_scan(solver, sol), rel=1e-12)
