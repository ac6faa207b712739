import dataclasses

import numpy as np
import pytest

from rro.basic_solver import basic_solve
from rro.errors import InvariantViolation
from rro.invariants import assert_plan, check_alpha_solution, check_dominance, check_plan
from rro.iterative_solver import iterative_solve
from rro.score_model import ReinforcedSet, Segment, SupportedSet


def test_clean_plan_passes(micro):
    supported, model = micro
    plan = iterative_solve(supported, model, 13)
    assert check_plan(supported, model, plan) == []
    assert_plan(supported, model, plan)


def test_dominance_catches_a_changed_original(micro):
    supported, _ = micro
    other = ReinforcedSet.from_pairs([(5, 10), (13, 20)])
    assert check_dominance(supported, other) == ["plan originals do not match the supported set"]
    assert check_dominance(SupportedSet.from_scores([5]), other)[0].startswith("cardinality")


def test_overspending_and_misreported_utility_are_caught(micro):
    supported, model = micro
    plan = iterative_solve(supported, model, 13)
    overspent = dataclasses.replace(plan, budget_total=10.0)
    assert any("exceeds" in p for p in check_plan(supported, model, overspent))
    wrong = dataclasses.replace(plan, utility_after=1.0)
    with pytest.raises(InvariantViolation) as excinfo:
        assert_plan(supported, model, wrong)
    assert any("recomputation" in v for v in excinfo.value.violations)


def test_alpha_solution_checks(micro):
    supported, model = micro
    sol = basic_solve(supported, model, 0.06)
    assert check_alpha_solution(supported, model, sol) == []
    broken = dataclasses.replace(sol, segments=(Segment(0, 20), Segment(0, 10)))
    problems = check_alpha_solution(supported, model, broken)
    assert any("overlap" in p for p in problems)


def test_chord_postcondition_catches_a_step_above_the_line(micro):
    supported, model = micro
    sol = basic_solve(supported, model, 0.06)
    # pretend 20's segment reaches down past the step at 10
    broken = dataclasses.replace(sol, segments=(Segment(5, 20),))
    problems = check_alpha_solution(supported, model, broken)
    assert any("rises above the chord line" in p for p in problems)
    assert not np.array_equal(sol.plan.reinforced, sol.plan.original)
