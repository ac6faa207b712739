"""
Bounded knapsack where value equals weight (fill the capacity as tightly as possible).

Items that share a `group` are alternative sizes for the same physical
entries: together they may be chosen at most `count` times. Plain
(size, count) items are groups with a single alternative.

multiple_choice_knapsack is the valued variant: one option per group, integer
costs, maximum total value.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from .config import settings
from .errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KnapsackItem:
    size: float
    count: int
    group: Optional[Hashable] = None

    def __post_init__(self):
        if not self.size > 0 or not math.isfinite(self.size):
            raise DomainError(f"knapsack item size must be positive, got {self.size!r}")
        if self.count < 1:
            raise DomainError(f"knapsack item count must be >= 1, got {self.count!r}")


@dataclass(frozen=True)
class KnapsackInstance:
    capacity: float
    items: Tuple[KnapsackItem, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.capacity < 0 or not math.isfinite(self.capacity):
            raise DomainError(f"knapsack capacity must be non-negative, got {self.capacity!r}")

    @classmethod
    def from_types(cls, capacity: float, item_types: Sequence[Tuple[float, int]]) -> "KnapsackInstance":
        return cls(float(capacity), tuple(KnapsackItem(float(s), int(c)) for s, c in item_types))

    def groups(self) -> List[Tuple[int, List[int]]]:
        """(shared count, item indices) per group, in first-appearance order."""
        order: Dict[Hashable, List[int]] = {}
        for i, item in enumerate(self.items):
            key = ("item", i) if item.group is None else ("group", item.group)
            order.setdefault(key, []).append(i)
        return [(min(self.items[i].count for i in idx), idx) for idx in order.values()]


def _distributions(count: int, options: int):
    """Every way of placing at most `count` copies into `options` slots."""
    for combo in itertools.product(range(count + 1), repeat=options):
        if sum(combo) <= count:
            yield combo


def _enumeration_size(groups) -> int:
    total = 1
    for count, idx in groups:
        total *= math.comb(count + len(idx), len(idx))
    return total


def _enumerate(instance: KnapsackInstance, groups, limit: float) -> List[int]:
    sizes = [item.size for item in instance.items]
    per_group = [
        [(sum(c * sizes[i] for c, i in zip(combo, idx)), combo) for combo in _distributions(count, len(idx))]
        for count, idx in groups
    ]
    best_fill, best_choice = -1.0, None
    for choice in itertools.product(*per_group):
        fill = sum(f for f, _ in choice)
        if fill <= limit and fill > best_fill:
            best_fill, best_choice = fill, choice
    counts = [0] * len(instance.items)
    for (count, idx), (_, combo) in zip(groups, best_choice):
        for c, i in zip(combo, idx):
            counts[i] = c
    return counts


def _dynamic_program(instance: KnapsackInstance, groups, limit: float, unit: float) -> List[int]:
    """DP over capacity in multiples of `unit`; sizes are rounded up so every answer is feasible."""
    cells = int(math.floor(limit / unit + 1e-9))
    units = [max(1, int(math.ceil(item.size / unit - 1e-9))) for item in instance.items]

    # Each stage is a 0/1 choice among (item index, copies) options.
    stages: List[List[Tuple[int, int]]] = []
    for count, idx in groups:
        if len(idx) == 1:
            i, left, chunk = idx[0], count, 1
            while left > 0:
                take = min(chunk, left)
                stages.append([(i, take)])
                left -= take
                chunk *= 2
        else:
            stages.extend([[(i, 1) for i in idx]] * count)

    fill = np.full(cells + 1, -np.inf)
    fill[0] = 0.0
    choices = []
    for options in stages:
        new = fill.copy()
        pick = np.full(cells + 1, -1, dtype=np.int32)
        for o, (i, copies) in enumerate(options):
            w = units[i] * copies
            if w > cells:
                continue
            cand = fill[: cells + 1 - w] + instance.items[i].size * copies
            better = cand > new[w:]
            new[w:][better] = cand[better]
            pick[w:][better] = o
        choices.append(pick)
        fill = new

    real = np.where(fill <= limit, fill, -np.inf)
    cell = int(np.argmax(real))
    counts = [0] * len(instance.items)
    for options, pick in zip(reversed(stages), reversed(choices)):
        o = pick[cell]
        if o < 0:
            continue
        i, copies = options[o]
        counts[i] += copies
        cell -= units[i] * copies
    return counts


def bounded_knapsack(instance: KnapsackInstance, enumeration_limit: Optional[int] = None,
                     resolution: Optional[float] = None) -> List[int]:
    """
    Chooses how many copies of each item to take so the total size is as
    large as possible without exceeding the capacity.

    Small instances are enumerated exhaustively (ties go to the first
    choice found); larger ones fall back to a dynamic program whose grid is
    half of `resolution` (or half the smallest item size).

    Returns:
        One count per item, in the order of instance.items.
    """
    if not instance.items or instance.capacity == 0:
        return [0] * len(instance.items)
    limit = instance.capacity + settings.solver.budget_tolerance * max(1.0, instance.capacity)
    groups = instance.groups()
    enumeration_limit = enumeration_limit or settings.solver.knapsack_enumeration_limit

    if _enumeration_size(groups) <= enumeration_limit:
        counts = _enumerate(instance, groups, limit)
    else:
        unit = (resolution or min(item.size for item in instance.items)) / 2.0
        logger.info("Knapsack too large to enumerate; dynamic program on a %.6g grid.", unit)
        counts = _dynamic_program(instance, groups, limit, unit)
    logger.debug("knapsack capacity=%.6g counts=%s", instance.capacity, counts)
    return counts


def fill(instance: KnapsackInstance, counts: Sequence[int]) -> float:
    return float(sum(c * item.size for c, item in zip(counts, instance.items)))


def multiple_choice_knapsack(groups: Sequence[Sequence[Tuple[int, int]]], capacity: int) -> List[int]:
    """
    Picks exactly one (cost, value) option per group so the total value is
    as large as possible with the total cost at most `capacity`.

    Costs are non-negative integers. Among equal values the cheapest total
    wins, then the earliest option of each group.

    Returns:
        The chosen option index per group.

    Raises:
        DomainError: On a negative cost or capacity, or when no choice fits.
    """
    if capacity < 0:
        raise DomainError(f"knapsack capacity must be non-negative, got {capacity!r}")
    floor = np.iinfo(np.int64).min // 4
    best = np.zeros(capacity + 1, dtype=np.int64)
    picks = np.full((len(groups), capacity + 1), -1, dtype=np.int32)
    for g, options in enumerate(groups):
        new = np.full(capacity + 1, floor, dtype=np.int64)
        for o, (cost, value) in enumerate(options):
            if cost < 0:
                raise DomainError(f"option cost must be non-negative, got {cost!r}")
            if cost > capacity:
                continue
            cand = best[: capacity + 1 - cost] + value
            better = cand > new[cost:]
            new[cost:][better] = cand[better]
            picks[g, cost:][better] = o
        best = new

    if best[capacity] <= floor // 2:
        raise DomainError("no choice of options fits the capacity")
    cell = int(np.argmax(best == best[capacity]))
    chosen = [0] * len(groups)
    for g in range(len(groups) - 1, -1, -1):
        o = int(picks[g, cell])
        chosen[g] = o
        cell -= groups[g][o][0]
    logger.debug("multiple-choice knapsack capacity=%d value=%d", capacity, int(best[capacity]))
    return chosen
