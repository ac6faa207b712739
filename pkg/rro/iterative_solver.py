"""
Budget-constrained reinforcement: search the gradient whose single-gradient
solution spends the budget, then spend what is left by promoting entries that
sit on collinear scores. Small empirical instances are finished by an exact
multiple-choice knapsack when that wins more pairs.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .basic_solver import AlphaSolution, BasicSolver
from .config import settings
from .errors import DomainError
from .knapsack import KnapsackInstance, KnapsackItem, bounded_knapsack, multiple_choice_knapsack
from .oracle import scale_exponent
from .score_model import (
    BudgetSpec,
    ComplementModel,
    EmpiricalComplement,
    ReinforcedSet,
    Segment,
    SupportedSet,
    scale_stats,
    utility,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Promotion:
    source: float
    destination: float
    count: int


@dataclass
class ReinforcementPlan:
    assignments: ReinforcedSet
    budget_total: float
    budget_used: float
    alpha_final: float
    utility_before: float
    utility_after: float
    targets: Tuple[float, ...] = ()
    collinear_promotions: List[Promotion] = field(default_factory=list)
    collinear: Dict[float, str] = field(default_factory=dict)
    segments: Sequence[Segment] = ()
    log_alpha_final: Optional[float] = None
    solver: str = "iterative"

    @property
    def slack(self) -> float:
        return max(0.0, self.budget_total - self.budget_used)


def _as_budget(budget: Union[BudgetSpec, float]) -> BudgetSpec:
    return budget if isinstance(budget, BudgetSpec) else BudgetSpec(float(budget))


def promotion_step_size(solution: AlphaSolution, y: float) -> float:
    """
    HIGHER(y) - y for a collinear score y.

    Raises:
        DomainError: If y is not collinear in this solution.
    """
    route = solution.routes.get(float(y))
    if route is None:
        raise DomainError(f"score {y} is not collinear at alpha={solution.alpha}")
    return route.step_size


def promotion_capacity(solution: AlphaSolution) -> float:
    """Budget absorbed by promoting every collinear entry to HIGHER(y)."""
    return solution.capacity


def identity_plan(supported: SupportedSet, model: ComplementModel, budget_total: float,
                  solver: str = "iterative") -> ReinforcementPlan:
    assignments = ReinforcedSet.identity(supported)
    u = utility(assignments, model)
    return ReinforcementPlan(
        assignments=assignments,
        budget_total=budget_total,
        budget_used=0.0,
        alpha_final=math.inf,
        utility_before=u,
        utility_after=u,
        solver=solver,
    )


# --- Residual budget ---

def _spend_residual(reinforced: np.ndarray, groups: List[Tuple[float, np.ndarray, List[float]]],
                    residual: float, tolerance: float, resolution: Optional[float]):
    """
    Moves entries up to spend at most `residual`.

    `groups` holds (source score, entry indices, ascending destinations); the
    entries of one group are interchangeable and are moved in index order.
    """
    new = reinforced.copy()
    promotions: List[Promotion] = []
    groups = [g for g in groups if len(g[1]) > 0]
    if residual <= 0 or not groups:
        return new, promotions

    if len(groups) == 1 and len(groups[0][2]) == 1:
        y, idx, (dest,) = groups[0]
        k = min(len(idx), int(math.floor((residual + tolerance) / (dest - y))))
        chosen = [k]
        items = [(0, y, idx, dest)]
    else:
        items = []
        knapsack_items = []
        for g, (y, idx, dests) in enumerate(groups):
            for dest in dests:
                items.append((g, y, idx, dest))
                knapsack_items.append(KnapsackItem(dest - y, len(idx), group=g))
        chosen = bounded_knapsack(KnapsackInstance(residual, tuple(knapsack_items)), resolution=resolution)

    offsets: Dict[int, int] = {}
    for (g, y, idx, dest), k in zip(items, chosen):
        if k <= 0:
            continue
        start = offsets.get(g, 0)
        new[idx[start:start + k]] = dest
        offsets[g] = start + k
        promotions.append(Promotion(float(y), float(dest), int(k)))
    return new, promotions


def _collinear_groups(solution: AlphaSolution) -> List[Tuple[float, np.ndarray, List[float]]]:
    reinforced = solution.plan.reinforced
    return [
        (route.source, np.nonzero(reinforced == route.source)[0], list(route.destinations))
        for route in sorted(solution.routes.values(), key=lambda r: r.source)
    ]


def _boundary_groups(hi: AlphaSolution, lo: AlphaSolution) -> List[Tuple[float, np.ndarray, List[float]]]:
    """Entries that the lower gradient reinforces further than the upper one."""
    a, b = hi.plan.reinforced, lo.plan.reinforced
    moved = np.nonzero(b > a)[0]
    groups = []
    for y in np.unique(a[moved]):
        idx = moved[a[moved] == y]
        for dest in np.unique(b[idx]):
            groups.append((float(y), idx[b[idx] == dest], [float(dest)]))
    return groups


# --- Exact completion ---

def _complete_exactly(model: EmpiricalComplement, original: np.ndarray, reinforced: np.ndarray,
                      budget: float) -> Optional[np.ndarray]:
    """
    Re-solves a small empirical instance as a multiple-choice knapsack over
    integer-scaled costs: each entry stays or moves to one complement score.

    Returns the new scores when they win strictly more pairs than
    `reinforced`, None otherwise or when the table would be too large.
    """
    limit = settings.solver.exact_completion_cells
    dests = model.distinct
    if original.size * (dests.size + 1) * (math.floor(budget) + 1) > limit:
        return None
    try:
        factor = 10 ** scale_exponent(np.concatenate((original, dests, [budget])).tolist())
    except DomainError:
        return None
    if max(float(dests[-1]), float(original[-1]), budget) * factor > 2 ** 53:
        return None
    capacity = int(round(budget * factor))
    d_int = np.rint(dests * factor).astype(np.int64)
    r_int = np.rint(original * factor).astype(np.int64)
    d_wins = model.count_at_most(dests).tolist()
    lows = np.searchsorted(d_int, r_int, side="right")
    highs = np.searchsorted(d_int, r_int + capacity, side="right")

    groups = []
    for r, w, lo, hi in zip(r_int.tolist(), model.count_at_most(original).tolist(), lows.tolist(), highs.tolist()):
        groups.append([(0, w)] + [(d - r, d_wins[j]) for j, d in enumerate(d_int[lo:hi].tolist(), lo)])
    if sum(len(g) for g in groups) * (capacity + 1) > limit:
        return None

    chosen = multiple_choice_knapsack(groups, capacity)
    completed = original.copy()
    for i, (o, lo) in enumerate(zip(chosen, lows.tolist())):
        if o > 0:
            completed[i] = dests[lo + o - 1]
    # originals ascend; sorting keeps every entry above its original at the same cost
    completed.sort()
    gain = int(model.count_at_most(completed).sum() - model.count_at_most(reinforced).sum())
    if gain <= 0:
        return None
    logger.info("Exact completion wins %d more pairs than the gradient plan.", gain)
    return completed


# --- Gradient search ---

class _Search:
    def __init__(self, solver: BasicSolver, budget: float, tolerance: float, max_iterations: int):
        self.solver = solver
        self.budget = budget
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.steps = 0

    def solve(self, alpha: float = None, log_alpha: float = None) -> AlphaSolution:
        self.steps += 1
        solution = self.solver.solve(alpha if alpha is not None else 0.0, log_alpha=log_alpha)
        logger.debug("step %d: alpha=%.6g budget_used=%.6g", self.steps, solution.alpha, solution.budget_used)
        return solution

    def spent(self, solution: AlphaSolution) -> bool:
        return abs(solution.budget_used - self.budget) <= self.tolerance

    def covered(self, solution: AlphaSolution) -> bool:
        return solution.budget_used + solution.capacity >= self.budget - self.tolerance

    def exhausted(self) -> bool:
        return self.steps >= self.max_iterations


def _exact_search(search: _Search, start: float, epsilon: float) -> AlphaSolution:
    p = search.budget
    cur = search.solve(start)
    if search.spent(cur):
        return cur

    if cur.budget_used < p:
        while True:
            if cur.saturated or search.covered(cur) or search.exhausted():
                return cur
            nxt = search.solve(cur.alpha / 2.0)
            if search.spent(nxt):
                return nxt
            if nxt.budget_used > p:
                lo, hi = nxt, cur
                break
            cur = nxt
    else:
        lo = cur
        while True:
            nxt = search.solve(lo.alpha * 2.0)
            if search.spent(nxt):
                return nxt
            if nxt.budget_used < p:
                hi = nxt
                break
            lo = nxt
            if search.exhausted():
                raise DomainError("could not bracket the budget; is the budget positive?")

    while not search.exhausted():
        if search.covered(hi):
            return hi
        if epsilon > 0 and hi.alpha - lo.alpha <= epsilon:
            return hi
        jump = hi.chord_next
        if lo.alpha < jump < hi.alpha:
            cand = search.solve(jump)
            if search.spent(cand):
                return cand
            if cand.budget_used > p:
                lo = cand
            else:
                hi = cand
                if search.covered(hi):
                    return hi
        mid = 0.5 * (lo.alpha + hi.alpha)
        if not lo.alpha < mid < hi.alpha:
            return hi
        cand = search.solve(mid)
        if search.spent(cand):
            return cand
        if cand.budget_used > p:
            lo = cand
        else:
            hi = cand
    logger.warning("Gradient search hit its iteration cap; stopping at alpha=%.6g.", hi.alpha)
    return hi


def _analytic_search(search: _Search, start_log: float, epsilon_log: float):
    """Bisection on log(alpha); returns (upper, lower) bracketing solutions (lower may be None)."""
    p = search.budget
    cur = search.solve(log_alpha=start_log)
    if search.spent(cur):
        return cur, None

    step = math.log(2.0)
    if cur.budget_used < p:
        while True:
            if cur.saturated or search.exhausted():
                return cur, None
            nxt = search.solve(log_alpha=cur.log_alpha - step)
            step *= 2.0
            if search.spent(nxt):
                return nxt, None
            if nxt.budget_used > p:
                lo, hi = nxt, cur
                break
            cur = nxt
    else:
        lo = cur
        while True:
            nxt = search.solve(log_alpha=lo.log_alpha + step)
            step *= 2.0
            if search.spent(nxt):
                return nxt, None
            if nxt.budget_used < p:
                hi = nxt
                break
            lo = nxt
            if search.exhausted():
                raise DomainError("could not bracket the budget; is the budget positive?")

    while hi.log_alpha - lo.log_alpha > epsilon_log and not search.exhausted():
        mid = 0.5 * (lo.log_alpha + hi.log_alpha)
        if not lo.log_alpha < mid < hi.log_alpha:
            break
        cand = search.solve(log_alpha=mid)
        if search.spent(cand):
            return cand, None
        if cand.budget_used > p:
            lo = cand
        else:
            hi = cand
    return hi, lo


def iterative_solve(supported: SupportedSet, model: ComplementModel, budget: Union[BudgetSpec, float],
                    epsilon: Optional[float] = None) -> ReinforcementPlan:
    """
    Finds the reinforcement that maximises utility within the budget.

    Args:
        supported: The principal's entries.
        model: The complement's score law.
        budget: Total budget in score units (a BudgetSpec or a number).
        epsilon: Stopping width of the gradient bracket. Defaults to 0 (exact)
            for an empirical complement and 1e-9 times the peak density for
            analytic ones, where 0 is rejected.

    Returns:
        A ReinforcementPlan whose budget_used never exceeds the budget.

    Raises:
        DomainError: On a negative epsilon, or epsilon = 0 with an analytic model.
    """
    budget = _as_budget(budget)
    p = budget.total
    cfg = settings.solver
    if epsilon is None:
        epsilon = 0.0 if model.is_empirical else 1e-9 * model.peak_density
    if epsilon < 0:
        raise DomainError(f"epsilon must be non-negative, got {epsilon!r}")
    if epsilon == 0 and not model.is_empirical:
        raise DomainError("epsilon = 0 only terminates for an empirical complement")

    if p <= 0:
        return identity_plan(supported, model, p)

    solver = BasicSolver(supported, model)
    tolerance = cfg.budget_tolerance * max(1.0, p)
    search = _Search(solver, p, tolerance, cfg.max_search_iterations)
    spread, resolution = scale_stats(supported, model)

    if model.is_empirical:
        final = _exact_search(search, 1.0 / spread if spread > 0 else 1.0, epsilon)
        groups = _collinear_groups(final)
        log_alpha_final = None
    else:
        peak = model.peak_density
        final, lower = _analytic_search(search, math.log(peak / 2.0), epsilon / peak)
        groups = _collinear_groups(final)
        if lower is not None:
            groups += _boundary_groups(final, lower)
        log_alpha_final = final.log_alpha

    residual = p - final.budget_used
    reinforced, promotions = _spend_residual(
        final.plan.reinforced, groups, residual, tolerance, resolution if model.is_empirical else None
    )
    if model.is_empirical:
        completed = _complete_exactly(model, final.plan.original, reinforced, p)
        if completed is not None:
            reinforced, promotions = completed, []
    assignments = ReinforcedSet(final.plan.original, reinforced)
    used = assignments.cost
    plan = ReinforcementPlan(
        assignments=assignments,
        budget_total=p,
        budget_used=used,
        alpha_final=final.alpha,
        utility_before=utility(ReinforcedSet.identity(supported), model),
        utility_after=utility(assignments, model),
        targets=final.targets,
        collinear_promotions=promotions,
        collinear=dict(final.collinear),
        segments=final.segments,
        log_alpha_final=log_alpha_final,
    )
    logger.info(
        "Solved in %d steps: alpha=%.6g budget_used=%.6g slack=%.6g promotions=%d",
        search.steps, plan.alpha_final, plan.budget_used, plan.slack, len(promotions),
    )
    return plan
