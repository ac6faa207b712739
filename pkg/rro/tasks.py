from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, TextIO
import csv
import logging

import numpy as np

from .basic_solver import BasicSolver
from .errors import DomainError, InvariantViolation
from .invariants import assert_plan, check_alpha_solution
from .iterative_solver import iterative_solve
from .oracle import OracleResult, oracle_solve, sign_sum_utility
from .plotting import render_plan
from .schemas import InstanceFile, PlanFile, instance_hash
from .score_model import EmpiricalComplement, ReinforcedSet, utility
from .unimodal import solve_unimodal, unimodal_profile

logger = logging.getLogger(__name__)

# The units of work behind each CLI command. They take validated documents,
# return plain results and leave all printing to rro_cli.


def solve_task(instance: InstanceFile, epsilon: Optional[float] = None, fastpath: bool = False) -> PlanFile:
    """
    Solves an instance and checks the plan before handing it back.

    Raises:
        NotUnimodalError: If fastpath is requested for a model without a unimodal density.
        InvariantViolation: If the produced plan fails a post-condition.
    """
    supported = instance.supported_set()
    model = instance.complement_model()
    budget = instance.budget_spec()
    if epsilon is None:
        epsilon = instance.epsilon

    if fastpath:
        unimodal_profile(model)
        logger.info(f"Solving with the unimodal fast path ({model!r}, budget {budget.total})")
        plan = solve_unimodal(supported, model, budget)
    else:
        logger.info(f"Solving iteratively ({model!r}, budget {budget.total}, epsilon {epsilon})")
        plan = iterative_solve(supported, model, budget, epsilon=epsilon)

    assert_plan(supported, model, plan)
    return PlanFile.from_plan(plan, instance_hash(instance))


@dataclass
class SweepRow:
    alpha: float
    budget_used: float
    next_alpha: float
    utility: float


def sweep_task(instance: InstanceFile, alpha_min: float, alpha_max: float, steps: int) -> List[SweepRow]:
    """
    Single-gradient solutions over log-spaced gradients, highest first.

    Raises:
        DomainError: On a bad range or fewer than two steps.
    """
    if not (0 < alpha_min < alpha_max):
        raise DomainError(f"need 0 < alpha-min < alpha-max, got [{alpha_min}, {alpha_max}]")
    if steps < 2:
        raise DomainError(f"need at least 2 steps, got {steps}")

    supported = instance.supported_set()
    model = instance.complement_model()
    solver = BasicSolver(supported, model)
    rows = []
    for alpha in np.geomspace(alpha_max, alpha_min, steps):
        solution = solver.solve(float(alpha))
        problems = check_alpha_solution(supported, model, solution)
        if problems:
            raise InvariantViolation(problems)
        rows.append(SweepRow(float(alpha), solution.budget_used, solution.next_alpha,
                             utility(solution.plan, model)))
        logger.debug(f"alpha={alpha:.6g} budget={solution.budget_used:.6g} next={solution.next_alpha:.6g}")
    return rows


def write_sweep_csv(rows: List[SweepRow], stream: TextIO) -> None:
    writer = csv.writer(stream)
    writer.writerow(["alpha", "budget_used", "next_alpha", "utility"])
    for row in rows:
        writer.writerow([repr(row.alpha), repr(row.budget_used), repr(row.next_alpha), repr(row.utility)])


def plot_task(instance: InstanceFile, plan: PlanFile, svg_path: str, csv_path: Optional[str] = None) -> int:
    """
    Renders the plan; returns the number of chord lines drawn.

    Raises:
        DomainError: If the plan was produced from a different instance.
    """
    expected = instance_hash(instance)
    if plan.instance_hash is not None and plan.instance_hash != expected:
        raise DomainError(
            f"plan instance_hash {plan.instance_hash[:12]}... does not match the instance ({expected[:12]}...)"
        )
    supported = instance.supported_set()
    if sorted(a for a, _ in plan.pairs()) != supported.scores.tolist():
        raise DomainError("plan assignments do not match the instance's supported scores")
    series = render_plan(supported, instance.complement_model(), plan, svg_path, csv_path)
    return sum(1 for name, _, _ in series if name.startswith("chord-"))


def oracle_task(instance: InstanceFile) -> OracleResult:
    """
    Raises:
        DomainError: "oracle requires empirical complement" for analytic models.
        InstanceTooLargeError: Above the oracle's size guard.
    """
    budget = instance.budget_spec()
    result = oracle_solve(instance.supported_set(), instance.complement_model(), budget.total)
    logger.info(f"Oracle explored {result.explored} assignments; best utility {result.best_utility}")
    return result


@dataclass
class UtilityReport:
    utility: float
    exact: Optional[Fraction] = None


def utility_task(instance: InstanceFile, plan: Optional[PlanFile] = None) -> UtilityReport:
    """Utility of the supported scores as given, or after the plan's reinforcement."""
    model = instance.complement_model()
    if plan is not None:
        scores = ReinforcedSet.from_pairs(plan.pairs())
    else:
        scores = instance.supported_set()
    report = UtilityReport(utility(scores, model))
    if isinstance(model, EmpiricalComplement):
        report.exact = sign_sum_utility(scores.scores.tolist(), model.scores.tolist())
    return report
