"""
Fast path for analytic complements with a single-peaked density.

Above the mode M the c.d.f. is concave, so at any gradient there is exactly
one target h >= M, and its trace l is where the tangent at h meets the c.d.f.
again below M. The search therefore runs over h instead of alpha. When the
density is decreasing everywhere (M = 0) the trace is always 0 and the answer
is the closed-form water-filling of the lowest entries.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .basic_solver import COLLINEAR_SOURCE
from .config import settings
from .errors import DomainError, NotUnimodalError
from .iterative_solver import Promotion, ReinforcementPlan, identity_plan
from .score_model import BudgetSpec, ComplementModel, ReinforcedSet, Segment, SupportedSet, utility

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UnimodalProfile:
    mode: float
    density_at_mode: float
    model: ComplementModel

    def __post_init__(self):
        if self.mode < 0 or not self.density_at_mode > 0:
            raise DomainError(f"invalid unimodal profile (mode={self.mode}, peak={self.density_at_mode})")


def unimodal_profile(model: ComplementModel) -> UnimodalProfile:
    """Raises NotUnimodalError for empirical and piecewise-linear complements."""
    if not model.is_unimodal:
        raise NotUnimodalError(model.name)
    return UnimodalProfile(model.mode, model.peak_density, model)


def _as_budget(budget: Union[BudgetSpec, float]) -> BudgetSpec:
    return budget if isinstance(budget, BudgetSpec) else BudgetSpec(float(budget))


def _plan(supported: SupportedSet, model: Optional[ComplementModel], reinforced: np.ndarray,
          budget_total: float, h: float, l: float, promotions=(), collinear=None) -> ReinforcementPlan:
    assignments = ReinforcedSet(supported.scores, reinforced)
    if model is not None:
        log_alpha = model.log_pdf(h)
        before = utility(ReinforcedSet.identity(supported), model)
        after = utility(assignments, model)
    else:
        log_alpha, before, after = None, math.nan, math.nan
    return ReinforcementPlan(
        assignments=assignments,
        budget_total=budget_total,
        budget_used=assignments.cost,
        alpha_final=math.exp(log_alpha) if log_alpha is not None else math.nan,
        utility_before=before,
        utility_after=after,
        targets=(h,),
        collinear_promotions=list(promotions),
        collinear=dict(collinear or {}),
        segments=(Segment(l, h),) if l < h else (),
        log_alpha_final=log_alpha,
        solver="unimodal",
    )


def solve_decreasing(supported: SupportedSet, budget: Union[BudgetSpec, float],
                     model: Optional[ComplementModel] = None) -> ReinforcementPlan:
    """
    Raises the m lowest entries to a common score h, where m is the smallest
    count whose lifting to the next entry would overspend.

    The result does not depend on which decreasing density the complement has;
    `model` is only used to report utilities and the final gradient.
    """
    budget = _as_budget(budget)
    r = supported.scores
    n = r.size
    prefix = np.cumsum(r)
    # cost of lifting the m lowest entries to r[m], for m = 1..n-1
    m_range = np.arange(1, n)
    lift = m_range * r[1:] - prefix[:-1]
    over = np.nonzero(lift > budget.total)[0]
    m = int(m_range[over[0]]) if over.size else n
    h = float((budget.total + prefix[m - 1]) / m)

    reinforced = r.copy()
    reinforced[:m] = np.maximum(reinforced[:m], h)
    logger.info("Decreasing density: %d entries levelled at %.6g", m, h)
    return _plan(supported, model, reinforced, budget.total, h, 0.0)


def _tangent_gap(model: ComplementModel, h: float):
    fh = float(model.cdf(h))
    slope = math.exp(model.log_pdf(h))

    def gap(l):
        return float(model.cdf(l)) - (fh + slope * (l - h))

    return gap


def solve_chord_tangency(model: ComplementModel, h: float) -> float:
    """
    The trace l of h at the gradient f_c(h): the point below the mode where the
    tangent to the c.d.f. at h meets the c.d.f. again, or 0 if it never does.

    Raises:
        DomainError: If h does not lie above the mode.
        NotUnimodalError: For complements without a unimodal density.
    """
    profile = unimodal_profile(model)
    if not h > profile.mode:
        raise DomainError(f"h={h} must lie above the mode {profile.mode}")
    if profile.mode == 0:
        return 0.0
    gap = _tangent_gap(model, h)
    if gap(0.0) < 0:
        return 0.0
    if gap(profile.mode) >= 0:
        # h is so close to the mode that the tangent cannot be told apart from the c.d.f.
        return profile.mode
    return float(brentq(gap, 0.0, profile.mode, xtol=1e-10 * profile.mode, rtol=1e-12, maxiter=500))


def tangency_threshold(model: ComplementModel) -> float:
    """
    Largest h above the mode whose tangent still meets the c.d.f. at a
    positive score; beyond it every trace is 0.
    """
    profile = unimodal_profile(model)
    mode = profile.mode
    if mode == 0:
        return 0.0

    def at_origin(h):
        return _tangent_gap(model, h)(0.0)

    hi = 2.0 * mode
    while at_origin(hi) >= 0:
        hi *= 2.0
    lo = mode * (1.0 + 1e-12)
    if at_origin(lo) < 0:
        return mode
    return float(brentq(at_origin, lo, hi, xtol=1e-12 * hi, maxiter=500))


def solve_unimodal(supported: SupportedSet, model: ComplementModel,
                   budget: Union[BudgetSpec, float]) -> ReinforcementPlan:
    """
    Single-target solution for a unimodal analytic complement.

    Bisects on the target h, whose implied budget sums h - r over the entries
    in (l, h). When the budget falls in a jump of that sum (entries sitting at
    l), the cheaper side is kept and up to K of the entries at l are promoted.

    Raises:
        NotUnimodalError: For complements without a unimodal density.
    """
    profile = unimodal_profile(model)
    budget = _as_budget(budget)
    p = budget.total
    if p <= 0:
        return identity_plan(supported, model, p, solver="unimodal")
    if profile.mode == 0:
        return solve_decreasing(supported, budget, model)

    r = supported.scores
    mode = profile.mode
    tol = settings.solver.budget_tolerance * max(1.0, p)

    def members(h):
        l = solve_chord_tangency(model, h)
        return l, (r > l) & (r < h)

    def spend(h):
        l, inside = members(h)
        return float(np.sum(h - r[inside])), l, inside

    lo = mode * (1.0 + 1e-12)
    hi = mode + p + float(r[-1])
    while spend(hi)[0] <= p:
        hi *= 2.0
    h_tol = settings.solver.unimodal_h_tolerance
    for _ in range(settings.solver.max_search_iterations):
        if hi - lo <= h_tol * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if spend(mid)[0] > p:
            hi = mid
        else:
            lo = mid

    spent_lo, l_lo, in_lo = spend(lo)
    _, l_hi, in_hi = spend(hi)

    # Continuous case: the budget is met exactly by levelling one member set.
    slack = 1e-9 * max(1.0, hi)
    for inside in (in_hi, in_lo):
        if inside.any():
            h = float((p + np.sum(r[inside])) / inside.sum())
            if lo - slack <= h <= hi + slack:
                l = solve_chord_tangency(model, h)
                reinforced = np.where(inside, h, r)
                logger.info("Unimodal: target %.6g, trace %.6g, budget met exactly", h, l)
                return _plan(supported, model, reinforced, p, h, min(l, h))

    # Jump case: entries at l join only below the final gradient.
    h = lo
    reinforced = np.where(in_lo, h, r)
    waiting = np.nonzero(in_hi & ~in_lo)[0]
    residual = p - spent_lo
    promotions = []
    collinear = {}
    moved = 0
    for i in waiting:
        cost = h - r[i]
        if cost > residual + tol:
            break
        reinforced[i] = h
        residual -= cost
        moved += 1
    if waiting.size:
        source = float(r[waiting[0]])
        collinear[source] = COLLINEAR_SOURCE
        if moved:
            promotions.append(Promotion(source, h, moved))
    logger.info("Unimodal: target %.6g, trace %.6g, promoted %d of %d entries at the trace",
                h, l_lo, moved, waiting.size)
    return _plan(supported, model, reinforced, p, h, l_lo, promotions, collinear)
