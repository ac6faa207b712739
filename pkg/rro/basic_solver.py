"""
Single-gradient reinforcement: for a fixed chord gradient alpha, find the
target scores, their traces and the resulting reinforcement.

The exact (empirical) version works on G(w) = F_c(w) - alpha * w: the chord
from x with slope alpha passes above the c.d.f. at z exactly when G(z) < G(x),
so targets are the complement scores whose G is not beaten by any higher
complement score, and the trace of a target is fixed by the highest ranked
score below it with G(z) >= G(x). Everything is computed with array
operations so one solve is linear in the number of distinct scores.
"""
import bisect
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .config import settings
from .errors import DomainError, EmptySetError
from .score_model import (
    ComplementModel,
    EmpiricalComplement,
    ExponentialComplement,
    LogNormalComplement,
    PiecewiseLinearComplement,
    ReinforcedSet,
    Segment,
    SegmentList,
    SupportedSet,
)

logger = logging.getLogger(__name__)

COLLINEAR_TARGET = "collinear-target"
COLLINEAR_SOURCE = "collinear-source"

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


# --- Result types ---

@dataclass(frozen=True)
class CandidateTargets:
    """Scores that may become targets at a given gradient, highest first."""
    scores: Tuple[float, ...]

    def __len__(self):
        return len(self.scores)

    def __iter__(self):
        return iter(self.scores)

    def __contains__(self, score):
        return score in self.scores


@dataclass(frozen=True)
class PromotionRoute:
    """
    Where the entries sitting on a collinear score may be moved.

    `destinations` runs upward along the chain of collinear targets and ends
    at HIGHER(y), the first target that is not itself collinear.
    """
    source: float
    count: int
    destinations: Tuple[float, ...]

    @property
    def higher(self) -> float:
        return self.destinations[-1]

    @property
    def step_size(self) -> float:
        return self.higher - self.source


@dataclass
class AlphaSolution:
    alpha: float
    # highest first
    target_scores: np.ndarray
    segments: Sequence[Segment]
    plan: ReinforcedSet
    budget_used: float
    collinear: Dict[float, str]
    last_trace: float
    routes: Dict[float, PromotionRoute] = field(default_factory=dict, repr=False)
    log_alpha: Optional[float] = None
    # Lowest gradient down to which the chord structure is unchanged (exclusive of
    # collinear points); an upper bound on next_alpha used to step the search.
    chord_next: float = 0.0
    saturated: bool = False
    _next_alpha: Optional[float] = field(default=None, repr=False)
    _next_alpha_fn: Optional[Callable[["AlphaSolution"], float]] = field(default=None, repr=False, compare=False)

    @cached_property
    def targets(self) -> Tuple[float, ...]:
        return tuple(self.target_scores.tolist())

    @property
    def next_alpha(self) -> float:
        """Next-lower gradient at which the budget changes (0 when it never does)."""
        if self._next_alpha is None:
            self._next_alpha = self._next_alpha_fn(self)
        return self._next_alpha

    @property
    def capacity(self) -> float:
        """Extra budget that promoting every collinear entry to HIGHER would cost."""
        return float(sum(r.count * r.step_size for r in self.routes.values()))

    def target_of(self, score: float) -> Optional[float]:
        high = float(SegmentList.of(self.segments).high_of(score))
        return None if math.isnan(high) else high

    def targets_of(self, scores: np.ndarray) -> np.ndarray:
        """Vectorised target_of; NaN for scores outside every segment."""
        return SegmentList.of(self.segments).high_of(scores)


# --- Candidate targets ---

def _log_alpha(alpha: float, log_alpha: Optional[float]) -> float:
    if log_alpha is not None:
        return float(log_alpha)
    if not alpha > 0 or not math.isfinite(alpha):
        raise DomainError(f"gradient alpha must be positive, got {alpha!r}")
    return math.log(alpha)


def _gradient(alpha: float, log_alpha: Optional[float]) -> Tuple[float, float]:
    """(alpha, log alpha); alpha is passed through unchanged unless only its log is given."""
    log_a = _log_alpha(alpha, log_alpha)
    if log_alpha is None:
        return float(alpha), log_a
    return math.exp(log_a), log_a


def candidate_targets(model: ComplementModel, alpha: float, log_alpha: Optional[float] = None) -> CandidateTargets:
    """
    Scores where the complement density steps down through alpha.

    For an empirical complement every step is a candidate. For the analytic
    families the gradient may be given as log_alpha so that far tails do not
    underflow.

    Raises:
        DomainError: If alpha <= 0.
    """
    log_a = _log_alpha(alpha, log_alpha)

    if isinstance(model, EmpiricalComplement):
        return CandidateTargets(tuple(model.distinct[::-1].tolist()))

    if isinstance(model, ExponentialComplement):
        x = (math.log(model.rate) - log_a) / model.rate
        return CandidateTargets((x,) if x > 0 else ())

    if isinstance(model, LogNormalComplement):
        s2 = model.sigma ** 2
        k = model.mu + math.log(model.sigma) + _LOG_SQRT_2PI + log_a
        disc = s2 * s2 - 2.0 * s2 * k
        if disc < 0:
            return CandidateTargets(())
        u = -s2 + math.sqrt(disc)
        return CandidateTargets((math.exp(model.mu + u),))

    if isinstance(model, PiecewiseLinearComplement):
        alpha_value = math.exp(log_a)
        picks = [
            float(model.xs[i])
            for i in range(len(model.xs))
            if model.left_density(i) >= alpha_value and model.right_density(i) <= alpha_value
        ]
        return CandidateTargets(tuple(sorted((p for p in picks if p > 0), reverse=True)))

    raise DomainError(f"unsupported complement model {model!r}")


# --- Traces ---

def _analytic_trace(model: ComplementModel, alpha: float, x: float,
                    xtol: Optional[float] = None, maxiter: Optional[int] = None) -> float:
    """Highest z < x where the chord line through (x, F_c(x)) meets the c.d.f., else 0."""
    xtol = (xtol or settings.solver.trace_xtol) * max(1.0, x)
    maxiter = maxiter or settings.solver.trace_max_iterations
    fx = float(model.cdf(x))

    def h(z):
        return float(model.cdf(z)) - fx - alpha * (z - x)

    def h_left(z):
        return float(model.cdf_left(z)) - fx - alpha * (z - x)

    brackets = model.trace_brackets(x)
    for i in range(len(brackets) - 1):
        hi, lo = brackets[i], brackets[i + 1]
        h_lo = h(lo)
        if i == 0:
            mid = 0.5 * (lo + hi)
            h_right = h(mid)
            if abs(h_lo) <= xtol and abs(h_right) <= xtol:
                # c.d.f. runs along the chord just left of x
                return x
            right = mid
        else:
            h_right = h_left(hi)
            right = hi
        if h_lo >= 0 > h_right:
            if h_lo == 0:
                return lo
            return float(brentq(h, lo, right, xtol=xtol, maxiter=maxiter))
    return 0.0


def _exact_trace(points: np.ndarray, cdf_points: np.ndarray, alpha: float, x: float,
                 fx: float, tolerance: float) -> Tuple[float, Optional[float], bool]:
    """Trace over a finite set of ranked scores; returns (trace, z, collinear)."""
    below = points < x
    if not np.any(below):
        return 0.0, None, False
    pts, fpts = points[below], cdf_points[below]
    gx = fx - alpha * x
    g = fpts - alpha * pts
    ok = np.nonzero(g >= gx - tolerance)[0]
    if ok.size == 0:
        return 0.0, None, False
    j = ok[-1]
    z, fz = float(pts[j]), float(fpts[j])
    if g[j] - gx <= tolerance:
        return z, z, True
    tr = x - (fx - fz) / alpha
    return min(max(tr, z), x), z, False


def trace(model: ComplementModel, supported: SupportedSet, alpha: float, x: float,
          log_alpha: Optional[float] = None) -> float:
    """
    TR_alpha(x): low endpoint of x's alpha-segment.

    For an empirical complement the ranked scores plus the origin (where the
    c.d.f. is 0) are inspected, so the result is where the chord actually
    meets the c.d.f. This can be above the value basic_solve reports for its
    lowest segment, which ignores the origin; the reinforced entries agree.

    Raises:
        DomainError: If x <= 0 or alpha <= 0.
    """
    if not x > 0:
        raise DomainError(f"trace needs a positive score, got {x!r}")
    alpha, _ = _gradient(alpha, log_alpha)
    if isinstance(model, EmpiricalComplement):
        points = np.concatenate(([0.0], np.union1d(model.distinct, supported.distinct[0])))
        tol = settings.solver.collinear_tolerance * (1.0 + alpha * max(x, float(points[-1])))
        tr, _, _ = _exact_trace(points, model.cdf(points), alpha, x, float(model.cdf(x)), tol)
        return tr
    return _analytic_trace(model, alpha, x)


# --- Solver ---

class BasicSolver:
    """
    Solves one gradient at a time for a fixed instance.

    Everything that does not depend on alpha (distinct scores, their c.d.f.
    values) is computed once, so the search in iterative_solve can call
    solve() many times cheaply.
    """

    def __init__(self, supported: SupportedSet, model: ComplementModel, tolerance: Optional[float] = None):
        if supported.n == 0:
            raise EmptySetError("supported set is empty")
        self.supported = supported
        self.model = model
        self.tolerance = tolerance if tolerance is not None else settings.solver.collinear_tolerance
        self._values, self._counts = supported.distinct
        if model.is_empirical:
            self._ctr = model.distinct
            self._ctr_cdf = model.step_tops
            self._values_cdf = model.cdf(self._values)
            self._points = np.union1d(self._ctr, self._values)
            self._points_cdf = np.asarray(model.cdf(self._points), dtype=float)

    @property
    def is_exact(self) -> bool:
        return self.model.is_empirical

    def solve(self, alpha: float, log_alpha: Optional[float] = None) -> AlphaSolution:
        alpha, log_a = _gradient(alpha, log_alpha)
        if self.is_exact:
            solution = self._solve_exact(alpha)
        else:
            solution = self._solve_analytic(alpha, log_a)
        logger.debug(
            "alpha=%.6g budget=%.6g targets=%d collinear=%d chord_next=%.6g",
            solution.alpha, solution.budget_used, solution.target_scores.size,
            len(solution.collinear), solution.chord_next,
        )
        return solution

    # --- exact version ---

    def _solve_exact(self, alpha: float) -> AlphaSolution:
        ctr, fc = self._ctr, self._ctr_cdf
        values, counts = self._values, self._counts
        tol = self.tolerance * (1.0 + alpha * float(ctr[-1]))

        # Targets: complement scores whose G is within tol of the best G above them.
        g = fc - alpha * ctr
        best_above = np.full(g.shape, -np.inf)
        best_above[:-1] = np.maximum.accumulate(g[::-1])[::-1][1:]
        is_target = g >= best_above - tol
        tx, tf = ctr[is_target], fc[is_target]
        tg = tf - alpha * tx
        k = tx.size

        # Each supported score belongs to the lowest target above it.
        owner = np.searchsorted(tx, values, side="right")
        owned = owner < k
        owner_c = np.minimum(owner, k - 1)
        sg = self._values_cdf - alpha * values
        qualifies = owned & (sg >= tg[owner_c] - tol)
        best_s = np.full(k, -np.inf)
        # values ascend, so the last qualifying value of each owner is its best
        q = np.nonzero(qualifies)[0]
        if q.size:
            owners = owner[q]
            last = np.append(owners[1:] != owners[:-1], True)
            best_s[owners[last]] = values[q[last]]

        lower = np.concatenate(([-np.inf], tx[:-1]))
        z = np.maximum(lower, best_s)
        has_z = np.isfinite(z)
        z_safe = np.where(has_z, z, 0.0)
        fz = np.asarray(self.model.cdf(z_safe), dtype=float)
        gz = fz - alpha * z_safe
        collinear = has_z & (gz - tg <= tol)
        z_is_target = has_z & (z == lower)

        with np.errstate(divide="ignore", invalid="ignore"):
            tr = np.where(has_z, tx - (tf - fz) / alpha, 0.0)
        tr = np.where(collinear, z_safe, tr)
        tr = np.minimum(np.maximum(tr, z_safe), tx)

        reinforce = owned & (values > tr[owner_c])
        dest = np.where(reinforce, tx[owner_c], values)
        budget = float(np.sum(counts * (dest - values)))
        plan = ReinforcedSet(self.supported.scores, np.repeat(dest, counts))

        keep = tr < tx
        segments = SegmentList(tr[keep][::-1], tx[keep][::-1])
        coll_idx = np.nonzero(collinear)[0]
        tags = {
            float(z[i]): COLLINEAR_TARGET if z_is_target[i] else COLLINEAR_SOURCE
            for i in coll_idx
        }
        routes = self._routes(tx, coll_idx, z, z_is_target & collinear, plan.reinforced)

        # Structural NEXT: chord gradient to the highest strictly-qualifying point.
        with np.errstate(divide="ignore", invalid="ignore"):
            chords = np.where(has_z & ~collinear, (tf - fz) / (tx - z_safe), -np.inf)
        if coll_idx.size:
            chords[coll_idx] = self._strict_chords(alpha, tol, tx, tf, tg, z_safe, coll_idx)
        chord_next = float(max(0.0, chords.max())) if k else 0.0

        return AlphaSolution(
            alpha=alpha,
            target_scores=tx[::-1],
            segments=segments,
            plan=plan,
            budget_used=budget,
            collinear=tags,
            last_trace=float(tr[0]) if k else math.inf,
            routes=routes,
            chord_next=chord_next,
            saturated=chord_next == 0.0 and not routes,
            _next_alpha_fn=self._exact_next_alpha,
        )

    def _routes(self, tx: np.ndarray, coll_idx: np.ndarray, z: np.ndarray,
                coll_target: np.ndarray, reinforced: np.ndarray) -> Dict[float, PromotionRoute]:
        routes = {}
        k = tx.size
        for i in coll_idx:
            top = i
            # target j sits on target j+1's chord
            while top + 1 < k and coll_target[top + 1]:
                top += 1
            y = float(z[i])
            count = int(np.searchsorted(reinforced, y, "right") - np.searchsorted(reinforced, y, "left"))
            routes[y] = PromotionRoute(y, count, tuple(tx[i:top + 1].tolist()))
        return routes

    def _strict_chords(self, alpha: float, tol: float, tx: np.ndarray, tf: np.ndarray,
                       tg: np.ndarray, z: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """
        Chord gradients from the collinear targets idx to the highest score
        below each lying strictly above its chord line.

        Nothing between z and the target clears the line, so the scan walks
        down from z in doubling windows and stops at the first hit.
        """
        pts, fpts = self._points, self._points_cdf
        out = np.full(idx.size, -np.inf)
        stops = np.searchsorted(pts, z[idx], side="right")
        for n, (i, stop) in enumerate(zip(idx.tolist(), stops.tolist())):
            line = tg[i] + tol
            width = 64
            while stop > 0:
                start = max(0, stop - width)
                above = np.nonzero(fpts[start:stop] - alpha * pts[start:stop] > line)[0]
                if above.size:
                    j = start + int(above[-1])
                    out[n] = (tf[i] - fpts[j]) / (tx[i] - pts[j])
                    break
                stop = start
                width *= 2
        return out

    def _exact_next_alpha(self, solution: AlphaSolution) -> float:
        """
        Largest chord gradient from an occupied score (where some entry ends up)
        to any complement score above it. Below that gradient the occupied
        score is overtaken and its entries move up; above it nothing moves.
        """
        occupied = np.unique(solution.plan.reinforced)
        occupied = occupied[occupied < self._ctr[-1]]
        if occupied.size == 0:
            return 0.0
        steepest = _steepest_chords(self._ctr, self._ctr_cdf, occupied, np.asarray(self.model.cdf(occupied)))
        best = float(steepest.max())
        if best >= solution.alpha * (1.0 - self.tolerance):
            return solution.alpha
        return max(best, 0.0)

    # --- statistical version ---

    def _solve_analytic(self, alpha: float, log_alpha: float) -> AlphaSolution:
        model = self.model
        values, counts = self._values, self._counts
        cands = candidate_targets(model, alpha, log_alpha=log_alpha).scores
        dest = values.copy()
        excluded = np.zeros(values.shape, dtype=bool)
        targets: List[float] = []
        segments: List[Segment] = []
        tags: Dict[float, str] = {}
        chains: Dict[float, Tuple[float, ...]] = {}
        ltr = math.inf
        chain_above: Tuple[float, ...] = ()

        i = 0
        while i < len(cands):
            x = cands[i]
            i += 1
            if x > ltr:
                continue
            targets.append(x)
            chain = (x,) + chain_above
            tr = _analytic_trace(model, alpha, x)
            chain_above = ()
            lower = [c for c in cands[i:] if c <= tr + self.tolerance * max(1.0, c)]
            if tr > 0 and lower and abs(lower[0] - tr) <= self.tolerance * max(1.0, lower[0]):
                tr = lower[0]
                tags[tr] = COLLINEAR_TARGET
                chains[tr] = chain
                chain_above = chain
            else:
                near = np.nonzero(np.abs(values - tr) <= self.tolerance * np.maximum(1.0, values))[0]
                if tr > 0 and near.size:
                    tr = float(values[near[0]])
                    tags[tr] = COLLINEAR_SOURCE
                    chains[tr] = chain
                    excluded[near] = True
            if tr < x:
                segments.append(Segment(tr, x))
            mask = (values > tr) & (values < x) & ~excluded
            dest[mask] = x
            ltr = tr
            if tr <= 0:
                break

        budget = float(np.sum(counts * (dest - values)))
        plan = ReinforcedSet(self.supported.scores, np.repeat(dest, counts))
        reinforced = plan.reinforced
        routes = {
            y: PromotionRoute(y, int(np.sum(reinforced == y)), chain)
            for y, chain in chains.items()
        }
        saturated = (
            len(segments) == 1 and segments[0].low == 0 and segments[0].high >= model.support_max
        )
        next_alpha = 0.0 if saturated else alpha
        return AlphaSolution(
            alpha=alpha,
            target_scores=np.asarray(targets, dtype=float),
            segments=SegmentList.of(segments),
            plan=plan,
            budget_used=budget,
            collinear=tags,
            last_trace=ltr,
            routes=routes,
            log_alpha=log_alpha,
            chord_next=next_alpha,
            saturated=saturated,
            _next_alpha=next_alpha,
        )


def _steepest_chords(xs: np.ndarray, fs: np.ndarray, queries: np.ndarray, fq: np.ndarray) -> np.ndarray:
    """
    For each query point, the largest chord gradient to a point of (xs, fs)
    strictly to its right (-inf if there is none).

    Points are fed right to left into an upper hull; a query left of every
    hull vertex sees a unimodal sequence of gradients along the hull, so its
    tangent vertex is found by bisection.
    """
    order = np.argsort(-queries, kind="stable")
    out = np.full(queries.shape, -np.inf)
    hull_x: List[float] = []
    hull_f: List[float] = []
    j = xs.size - 1

    def slope(ax, af, bx, bf):
        return (bf - af) / (bx - ax)

    for q in order:
        qx, qf = float(queries[q]), float(fq[q])
        while j >= 0 and xs[j] > qx:
            px, pf = float(xs[j]), float(fs[j])
            while len(hull_x) >= 2 and slope(px, pf, hull_x[-1], hull_f[-1]) <= slope(hull_x[-1], hull_f[-1], hull_x[-2], hull_f[-2]):
                hull_x.pop()
                hull_f.pop()
            hull_x.append(px)
            hull_f.append(pf)
            j -= 1
        if not hull_x:
            continue
        # hull is stored right to left; walk from the leftmost vertex
        lo, hi = 0, len(hull_x) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            a = len(hull_x) - 1 - mid
            if slope(qx, qf, hull_x[a], hull_f[a]) >= slope(qx, qf, hull_x[a - 1], hull_f[a - 1]):
                hi = mid
            else:
                lo = mid + 1
        a = len(hull_x) - 1 - lo
        out[q] = slope(qx, qf, hull_x[a], hull_f[a])
    return out


def basic_solve(supported: SupportedSet, model: ComplementModel, alpha: float,
                log_alpha: Optional[float] = None) -> AlphaSolution:
    """
    Runs the single-gradient algorithm.

    Args:
        supported: The principal's entries.
        model: The complement's score law.
        alpha: Chord gradient, > 0.
        log_alpha: Optional natural log of alpha, used instead of alpha when given.

    Returns:
        An AlphaSolution. Entries sitting exactly on a collinear score are left
        in place; iterative_solve decides whether to promote them.

    Raises:
        DomainError: If alpha <= 0.
        EmptySetError: If the supported set is empty.
    """
    return BasicSolver(supported, model).solve(alpha, log_alpha=log_alpha)


def budget_curve(supported: SupportedSet, model: ComplementModel,
                 alphas: Iterable[float]) -> List[Tuple[float, float, float]]:
    """(alpha, budget_used, next_alpha) for each gradient, highest gradient first."""
    alphas = sorted((float(a) for a in alphas), reverse=True)
    if not alphas:
        raise DomainError("budget_curve needs at least one gradient")
    solver = BasicSolver(supported, model)
    rows = []
    for alpha in alphas:
        solution = solver.solve(alpha)
        rows.append((alpha, solution.budget_used, solution.next_alpha))
    return rows
