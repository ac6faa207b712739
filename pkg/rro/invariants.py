"""
Post-condition checks run on every plan the CLI emits and throughout the tests.

Each check returns a list of human-readable violations; an empty list means
the output is sound. `assert_plan` turns violations into InvariantViolation.
"""
import logging
from typing import List, Optional

import numpy as np

from .basic_solver import AlphaSolution
from .config import settings
from .errors import InvariantViolation
from .iterative_solver import ReinforcementPlan
from .score_model import ComplementModel, EmpiricalComplement, ReinforcedSet, SupportedSet, utility

logger = logging.getLogger(__name__)

UTILITY_TOLERANCE = 1e-12


def check_dominance(supported: SupportedSet, after: ReinforcedSet) -> List[str]:
    """Cardinality, reinforced >= original, and F_A <= F_a at every breakpoint."""
    problems = []
    if after.n != supported.n:
        problems.append(f"cardinality changed from {supported.n} to {after.n}")
        return problems
    if not np.array_equal(np.sort(after.original), supported.scores):
        problems.append("plan originals do not match the supported set")
    if np.any(after.reinforced < after.original):
        problems.append("a reinforced score is below its original")
    breakpoints = np.union1d(after.original, after.reinforced)
    if np.any(after.cdf(breakpoints) > supported.cdf(breakpoints)):
        problems.append("reinforced distribution does not dominate the original")
    return problems


def check_plan(supported: SupportedSet, model: ComplementModel, plan: ReinforcementPlan,
               budget_tolerance: Optional[float] = None) -> List[str]:
    problems = check_dominance(supported, plan.assignments)
    if problems:
        return problems
    rel = budget_tolerance if budget_tolerance is not None else settings.solver.budget_tolerance
    tol = rel * max(1.0, plan.budget_total)

    if plan.budget_used > plan.budget_total + tol:
        problems.append(f"budget_used {plan.budget_used} exceeds budget_total {plan.budget_total}")
    cost = plan.assignments.cost
    if abs(cost - plan.budget_used) > tol:
        problems.append(f"budget_used {plan.budget_used} differs from the reinforcement cost {cost}")
    before = utility(ReinforcedSet.identity(supported), model)
    after = utility(plan.assignments, model)
    if plan.utility_after < plan.utility_before - UTILITY_TOLERANCE:
        problems.append("utility decreased")
    if abs(after - plan.utility_after) > UTILITY_TOLERANCE or abs(before - plan.utility_before) > UTILITY_TOLERANCE:
        problems.append("reported utilities do not match a recomputation")
    for promotion in plan.collinear_promotions:
        available = int(np.sum(plan.assignments.original <= promotion.source))
        if promotion.count < 0 or promotion.count > available:
            problems.append(f"promotion count {promotion.count} from {promotion.source} is not available")
    return problems


def check_alpha_solution(supported: SupportedSet, model: ComplementModel, solution: AlphaSolution,
                         tolerance: Optional[float] = None) -> List[str]:
    """Segment structure plus, for an empirical complement, the chord post-conditions."""
    problems = check_dominance(supported, solution.plan)
    segments = sorted(solution.segments, key=lambda s: s.low)
    for a, b in zip(segments, segments[1:]):
        if a.high > b.low:
            problems.append(f"segments [{a.low}, {a.high}) and [{b.low}, {b.high}) overlap")
    targets = set(solution.targets)
    for segment in segments:
        if segment.high not in targets:
            problems.append(f"segment high {segment.high} is not a target")

    moved = solution.plan.reinforced != solution.plan.original
    sources, dests = solution.plan.original[moved], solution.plan.reinforced[moved]
    wrong = solution.targets_of(sources) != dests
    for r, R in zip(sources[wrong], dests[wrong]):
        problems.append(f"entry {r} was moved to {R}, not to the high end of its segment")

    if isinstance(model, EmpiricalComplement):
        tau = tolerance if tolerance is not None else settings.solver.collinear_tolerance
        alpha = solution.alpha
        for segment in segments:
            y = segment.high
            inside = model.distinct[(model.distinct >= segment.low) & (model.distinct < y)]
            line = float(model.cdf(y)) + alpha * (inside - y)
            slack = tau * (1.0 + alpha * float(model.distinct[-1]))
            if np.any(model.cdf(inside) > line + slack):
                problems.append(f"a complement step inside [{segment.low}, {y}) rises above the chord line")
    return problems


def assert_plan(supported: SupportedSet, model: ComplementModel, plan: ReinforcementPlan) -> None:
    problems = check_plan(supported, model, plan)
    if problems:
        logger.error("Plan failed %d invariant(s): %s", len(problems), problems)
        raise InvariantViolation(problems)
