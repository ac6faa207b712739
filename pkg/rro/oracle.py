"""
Brute-force reference optimizer for small exact instances.

Scores are scaled to integers and utilities kept as Fractions, so the oracle
has no floating-point tolerance to argue about. Each entry may stay put or
move to any complement score at or above it; every combination is tried.
"""
import bisect
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .config import settings
from .errors import DomainError, EmptyComplementError, EmptySetError, InstanceTooLargeError
from .score_model import EmpiricalComplement, ReinforcedSet, SupportedSet

logger = logging.getLogger(__name__)

MAX_DECIMALS = 12

UtilityHook = Callable[[Sequence[int], Sequence[int]], Fraction]


@dataclass
class OracleResult:
    best_utility: Fraction
    best_plans: List[ReinforcedSet] = field(default_factory=list)
    explored: int = 0
    scale: int = 1

    def best_costs(self) -> List[float]:
        return [plan.cost for plan in self.best_plans]


def _decimal(value) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return Fraction(repr(float(value)))


def scale_exponent(values: Iterable) -> int:
    """Smallest k <= 12 such that every value times 10^k is an integer."""
    fractions = [_decimal(v) for v in values]
    for k in range(MAX_DECIMALS + 1):
        if all((f * 10 ** k).denominator == 1 for f in fractions):
            return k
    raise DomainError(f"scores need more than {MAX_DECIMALS} decimal places to be compared exactly")


def sign_sum_utility(a_scores: Sequence, c_scores: Sequence) -> Fraction:
    """
    (1/(n*m)) * sum of sign(a - c) over all pairs, with sign(0) = +1.

    Raises:
        EmptySetError: If either multiset is empty.
    """
    if len(c_scores) == 0:
        raise EmptyComplementError()
    if len(a_scores) == 0:
        raise EmptySetError("principal's scores are empty")
    ordered = sorted(_decimal(c) for c in c_scores)
    wins = sum(bisect.bisect_right(ordered, _decimal(a)) for a in a_scores)
    n, m = len(a_scores), len(ordered)
    return Fraction(2 * wins - n * m, n * m)


def oracle_solve(supported: SupportedSet, complement: EmpiricalComplement, budget_total: float,
                 extra_targets: Sequence[float] = (), utility_hook: Optional[UtilityHook] = None) -> OracleResult:
    """
    Enumerates every assignment and keeps the best within budget.

    Args:
        supported: The principal's entries (n <= 6 by default).
        complement: An empirical complement (m <= 8 by default).
        budget_total: Total budget in score units.
        extra_targets: Additional scores an entry may move to, e.g. midpoints
            between complement scores for the self-check.
        utility_hook: Optional replacement for the sign-sum utility, called
            with the scaled integer scores of both sides.

    Raises:
        DomainError: If the complement is not empirical or the budget is negative.
        InstanceTooLargeError: If the instance exceeds the size guard.
    """
    if not isinstance(complement, EmpiricalComplement):
        raise DomainError("oracle requires empirical complement")
    if budget_total < 0:
        raise DomainError("budget must be non-negative")
    guard = settings.oracle
    if supported.n > guard.max_supported or complement.m > guard.max_complement:
        raise InstanceTooLargeError(
            f"oracle is limited to n <= {guard.max_supported} and m <= {guard.max_complement}, "
            f"got n={supported.n}, m={complement.m}"
        )

    originals = supported.scores.tolist()
    comp = complement.scores.tolist()
    extras = [float(x) for x in extra_targets]
    k = scale_exponent(originals + comp + extras + [budget_total])
    factor = 10 ** k

    def scaled(v) -> int:
        return int(_decimal(v) * factor)

    comp_int = sorted(scaled(c) for c in comp)
    budget_int = _decimal(budget_total) * factor
    destinations = sorted({(scaled(v), float(v)) for v in comp + extras})

    n, m = len(originals), len(comp_int)
    per_entry = []
    for r in originals:
        r_int = scaled(r)
        options = [(r_int, r)] + [(d, v) for d, v in destinations if d > r_int]
        per_entry.append([
            (d - r_int, bisect.bisect_right(comp_int, d), d, v) for d, v in options
        ])

    best_key = None
    best: List[Tuple[Tuple[float, float], ...]] = []
    seen = set()
    explored = 0
    for choice in itertools.product(*per_entry):
        explored += 1
        cost = sum(c[0] for c in choice)
        if cost > budget_int:
            continue
        if utility_hook is None:
            value = Fraction(2 * sum(c[1] for c in choice) - n * m, n * m)
        else:
            value = Fraction(utility_hook([c[2] for c in choice], comp_int))
        if best_key is None or value > best_key:
            best_key, best, seen = value, [], set()
        if value == best_key:
            pairs = tuple(sorted(zip(originals, (c[3] for c in choice))))
            if pairs not in seen:
                seen.add(pairs)
                best.append(pairs)

    plans = [ReinforcedSet.from_pairs(pairs) for pairs in best]
    logger.debug("oracle explored %d assignments, best utility %s", explored, best_key)
    return OracleResult(best_utility=best_key, best_plans=plans, explored=explored, scale=factor)


def midpoints(complement: EmpiricalComplement) -> List[float]:
    values = complement.distinct
    return ((values[:-1] + values[1:]) / 2.0).tolist()


def restricted_targets_suffice(supported: SupportedSet, complement: EmpiricalComplement,
                               budget_total: float) -> bool:
    """True when allowing midpoint targets does not raise the best utility."""
    plain = oracle_solve(supported, complement, budget_total)
    widened = oracle_solve(supported, complement, budget_total, extra_targets=midpoints(complement))
    return widened.best_utility <= plain.best_utility
