"""
Domain types and distribution queries for the reinforcement problem.

Scores are positive reals. The principal's entries form an integral
distribution (a sorted multiset with denominator n); the complement is
either an empirical step c.d.f. or one of three analytic families.
Ties are always won by the principal, which is why every c.d.f. here is
right-continuous: F_c(x) counts complement scores <= x.
"""
import logging
import math
from collections import abc
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateChordError, DomainError, EmptyComplementError, EmptySetError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _frozen(values: Iterable[float]) -> np.ndarray:
    arr = np.sort(np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float))
    arr.setflags(write=False)
    return arr


def _check_domain(x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"scores must be non-negative, got {x!r}")
    return arr


def _unwrap(arr: np.ndarray, like: ArrayLike):
    return float(arr) if np.ndim(like) == 0 else arr


# --- Principal's entries ---

@dataclass(frozen=True, eq=False)
class SupportedSet:
    """The principal's entries before reinforcement, kept in non-decreasing order."""
    scores: np.ndarray

    @classmethod
    def from_scores(cls, scores: Iterable[float]) -> "SupportedSet":
        arr = _frozen(scores)
        if arr.size == 0:
            raise EmptySetError("supported set is empty")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("every supported score must be a positive finite number")
        return cls(arr)

    @property
    def n(self) -> int:
        return int(self.scores.size)

    @cached_property
    def distinct(self) -> Tuple[np.ndarray, np.ndarray]:
        """Distinct scores (ascending) and how many entries sit at each."""
        return np.unique(self.scores, return_counts=True)

    def cdf(self, x: ArrayLike):
        """F_a(x): fraction of entries with score <= x."""
        arr = np.asarray(x, dtype=float)
        return _unwrap(np.searchsorted(self.scores, arr, side="right") / self.n, x)


@dataclass(frozen=True, eq=False)
class ReinforcedSet:
    """
    Per-entry score assignments after reinforcement.

    `original` is aligned with the sorted SupportedSet it came from, and
    `reinforced[i]` is the new score of entry i.
    """
    original: np.ndarray
    reinforced: np.ndarray

    def __post_init__(self):
        if self.original.shape != self.reinforced.shape:
            raise DomainError("a reinforced set must keep the cardinality of its source")
        if self.original.size == 0:
            raise EmptySetError("reinforced set is empty")
        if np.any(self.reinforced < self.original):
            raise DomainError("reinforcement can only increase scores")

    @classmethod
    def identity(cls, supported: SupportedSet) -> "ReinforcedSet":
        return cls(supported.scores, supported.scores)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]]) -> "ReinforcedSet":
        ordered = sorted((float(a), float(b)) for a, b in pairs)
        original = np.array([a for a, _ in ordered], dtype=float)
        reinforced = np.array([b for _, b in ordered], dtype=float)
        original.setflags(write=False)
        reinforced.setflags(write=False)
        return cls(original, reinforced)

    @property
    def n(self) -> int:
        return int(self.original.size)

    @property
    def scores(self) -> np.ndarray:
        return self.reinforced

    @property
    def added(self) -> np.ndarray:
        return self.reinforced - self.original

    @property
    def cost(self) -> float:
        return float(np.sum(self.added))

    def pairs(self) -> List[Tuple[float, float]]:
        return list(zip(self.original.tolist(), self.reinforced.tolist()))

    def cdf(self, x: ArrayLike):
        """F_A(x): fraction of entries whose reinforced score is <= x."""
        arr = np.asarray(x, dtype=float)
        ordered = np.sort(self.reinforced)
        return _unwrap(np.searchsorted(ordered, arr, side="right") / self.n, x)


# --- Complement models ---

class ComplementModel:
    """Base class for the complement's score law."""

    name = "complement"
    is_empirical = False

    def cdf(self, x: ArrayLike):
        raise NotImplementedError

    def cdf_left(self, x: ArrayLike):
        """lim F_c(z) for z -> x from below; equals cdf() wherever there is no atom."""
        return self.cdf(x)

    def pdf(self, x: ArrayLike):
        raise NotImplementedError

    @property
    def support_max(self) -> float:
        return math.inf

    @property
    def mode(self) -> float:
        raise NotImplementedError

    @property
    def peak_density(self) -> float:
        raise NotImplementedError

    @property
    def is_unimodal(self) -> bool:
        return False

    def trace_brackets(self, x: float) -> List[float]:
        """Descending scan points from x down to 0 between which F_c is convex or concave."""
        return [x, 0.0]

    def describe(self) -> dict:
        raise NotImplementedError


class EmpiricalComplement(ComplementModel):
    """The exact version: the complement's scores are known in full."""

    name = "empirical"
    is_empirical = True

    def __init__(self, scores: Iterable[float]):
        arr = _frozen(scores)
        if arr.size == 0:
            raise EmptyComplementError()
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("every complement score must be a positive finite number")
        self.scores = arr
        values, counts = np.unique(arr, return_counts=True)
        self.distinct = values
        # c.d.f. value at the top of each step
        self.step_tops = np.cumsum(counts) / arr.size

    @property
    def m(self) -> int:
        return int(self.scores.size)

    def cdf(self, x: ArrayLike):
        arr = _check_domain(x)
        return _unwrap(np.searchsorted(self.scores, arr, side="right") / self.m, x)

    def cdf_left(self, x: ArrayLike):
        arr = _check_domain(x)
        return _unwrap(np.searchsorted(self.scores, arr, side="left") / self.m, x)

    def count_at_most(self, x: ArrayLike) -> np.ndarray:
        return np.searchsorted(self.scores, np.asarray(x, dtype=float), side="right")

    @property
    def support_max(self) -> float:
        return float(self.scores[-1])

    def describe(self) -> dict:
        return {"empirical": self.scores.tolist()}

    def __repr__(self):
        return f"EmpiricalComplement(m={self.m})"


class ExponentialComplement(ComplementModel):
    """Exponential(rate) complement; its density is decreasing, so the mode is 0."""

    name = "exponential"

    def __init__(self, rate: float):
        if not rate > 0 or not math.isfinite(rate):
            raise DomainError(f"exponential rate must be positive, got {rate!r}")
        self.rate = float(rate)

    def cdf(self, x: ArrayLike):
        arr = _check_domain(x)
        return _unwrap(-np.expm1(-self.rate * arr), x)

    def pdf(self, x: ArrayLike):
        arr = _check_domain(x)
        return _unwrap(self.rate * np.exp(-self.rate * arr), x)

    def log_pdf(self, x: float) -> float:
        return math.log(self.rate) - self.rate * x

    @property
    def mode(self) -> float:
        return 0.0

    @property
    def peak_density(self) -> float:
        return self.rate

    @property
    def is_unimodal(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"exponential": {"lambda": self.rate}}

    def __repr__(self):
        return f"ExponentialComplement(rate={self.rate})"


class LogNormalComplement(ComplementModel):
    """LogNormal(mu, sigma) complement: convex c.d.f. below the mode, concave above it."""

    name = "lognormal"

    def __init__(self, mu: float, sigma: float):
        if not sigma > 0 or not math.isfinite(sigma) or not math.isfinite(mu):
            raise DomainError(f"log-normal needs finite mu and sigma > 0, got ({mu!r}, {sigma!r})")
        self.mu = float(mu)
        self.sigma = float(sigma)

    def cdf(self, x: ArrayLike):
        arr = _check_domain(x)
        with np.errstate(divide="ignore"):
            z = (np.log(arr) - self.mu) / self.sigma
        return _unwrap(np.where(arr > 0, ndtr(z), 0.0), x)

    def log_pdf(self, x: float) -> float:
        if x <= 0:
            return -math.inf
        lx = math.log(x)
        return -lx - math.log(self.sigma) - _LOG_SQRT_2PI - (lx - self.mu) ** 2 / (2 * self.sigma ** 2)

    def pdf(self, x: ArrayLike):
        arr = _check_domain(x)
        out = np.array([math.exp(self.log_pdf(v)) if v > 0 else 0.0 for v in np.atleast_1d(arr)])
        return float(out[0]) if np.ndim(x) == 0 else out

    @property
    def mode(self) -> float:
        return math.exp(self.mu - self.sigma ** 2)

    @property
    def peak_density(self) -> float:
        return math.exp(self.log_pdf(self.mode))

    @property
    def is_unimodal(self) -> bool:
        return True

    def trace_brackets(self, x: float) -> List[float]:
        m = self.mode
        return [x, m, 0.0] if m < x else [x, 0.0]

    def describe(self) -> dict:
        return {"lognormal": {"mu": self.mu, "sigma": self.sigma}}

    def __repr__(self):
        return f"LogNormalComplement(mu={self.mu}, sigma={self.sigma})"


class PiecewiseLinearComplement(ComplementModel):
    """
    Complement with a piecewise-linear c.d.f. through the given (x, F) knots.

    F_c is 0 below the first knot (an atom sits there when its F is positive)
    and 1 from the last knot on.
    """

    name = "piecewise_linear_cdf"

    def __init__(self, knots: Sequence[Tuple[float, float]]):
        if len(knots) == 0:
            raise EmptyComplementError()
        xs = np.array([float(k[0]) for k in knots])
        fs = np.array([float(k[1]) for k in knots])
        if xs[0] < 0:
            raise DomainError("the first knot must have x >= 0")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("knots must be strictly increasing in x")
        if np.any(np.diff(fs) < 0) or fs[0] < 0 or fs[-1] != 1.0:
            raise DomainError("knot c.d.f. values must be non-decreasing from >= 0 up to exactly 1")
        self.xs = xs
        self.fs = fs
        self.slopes = np.diff(fs) / np.diff(xs)

    def cdf(self, x: ArrayLike):
        arr = _check_domain(x)
        out = np.where(arr < self.xs[0], 0.0, np.interp(arr, self.xs, self.fs))
        return _unwrap(out, x)

    def cdf_left(self, x: ArrayLike):
        arr = _check_domain(x)
        out = np.where(arr <= self.xs[0], 0.0, np.interp(arr, self.xs, self.fs))
        return _unwrap(out, x)

    def pdf(self, x: ArrayLike):
        """Right density; piecewise constant."""
        arr = _check_domain(x)
        idx = np.searchsorted(self.xs, arr, side="right") - 1
        inside = (idx >= 0) & (idx < self.slopes.size)
        out = np.where(inside, self.slopes[np.clip(idx, 0, max(self.slopes.size - 1, 0))] if self.slopes.size else 0.0, 0.0)
        return _unwrap(out, x)

    def left_density(self, i: int) -> float:
        """Density just left of knot i (infinite across the atom at the first knot)."""
        if i == 0:
            return math.inf if self.fs[0] > 0 else 0.0
        return float(self.slopes[i - 1])

    def right_density(self, i: int) -> float:
        return float(self.slopes[i]) if i < self.slopes.size else 0.0

    @property
    def support_max(self) -> float:
        return float(self.xs[-1])

    @property
    def peak_density(self) -> float:
        return float(self.slopes.max()) if self.slopes.size else 1.0

    @property
    def mode(self) -> float:
        if self.slopes.size == 0:
            return float(self.xs[0])
        return float(self.xs[int(np.argmax(self.slopes))])

    def trace_brackets(self, x: float) -> List[float]:
        below = [float(k) for k in self.xs[::-1] if 0 < k < x]
        return [x] + below + [0.0]

    def describe(self) -> dict:
        return {"piecewise_linear_cdf": {"points": [[float(a), float(b)] for a, b in zip(self.xs, self.fs)]}}

    def __repr__(self):
        return f"PiecewiseLinearComplement(knots={len(self.xs)})"


# --- Operations ---

def cdf(model: ComplementModel, x: ArrayLike):
    """F_c(x), right-continuous; raises DomainError for negative x."""
    return model.cdf(x)


def chord_gradient(model: ComplementModel, x: float, y: float) -> float:
    """C_x^y: the average complement density between two distinct scores."""
    if x == y:
        raise DegenerateChordError(f"chord gradient needs two distinct scores, got {x} twice")
    return (model.cdf(x) - model.cdf(y)) / (x - y)


def utility(after, model: ComplementModel) -> float:
    """
    Average signed comparison of the principal's scores against the complement.

    Equals (1/n) * sum(2 F_c(R_z) - 1). For an empirical complement the sum is
    formed from integer win counts so it matches the explicit sign-sum exactly.
    """
    scores = np.asarray(after.scores, dtype=float)
    if scores.size == 0:
        raise EmptySetError("utility of an empty set is undefined")
    if isinstance(model, EmpiricalComplement):
        n, m = scores.size, model.m
        wins = int(np.sum(model.count_at_most(scores)))
        return (2 * wins - n * m) / (n * m)
    return float(np.mean(2.0 * model.cdf(scores) - 1.0))


def expectation(s) -> float:
    """Average score of a supported or reinforced set."""
    scores = np.asarray(s.scores, dtype=float)
    if scores.size == 0:
        raise EmptySetError("expectation of an empty set is undefined")
    return float(np.mean(scores))


def scale_stats(supported: SupportedSet, model: ComplementModel) -> Tuple[float, float]:
    """RANGE and RES over every ranked score, used to seed searches and discretise knapsacks."""
    if isinstance(model, EmpiricalComplement):
        pool = np.union1d(supported.distinct[0], model.distinct)
    else:
        pool = supported.distinct[0]
    spread = float(pool[-1] - pool[0]) if pool.size > 1 else float(pool[0])
    gaps = np.diff(pool)
    resolution = float(gaps.min()) if gaps.size else spread
    return max(spread, 0.0), resolution


# --- Budgets and segments ---

@dataclass(frozen=True)
class BudgetSpec:
    """A total budget in score units; the per-entry figure is derived from it."""
    total: float

    def __post_init__(self):
        if not math.isfinite(self.total) or self.total < 0:
            raise DomainError(f"budget must be a non-negative finite number, got {self.total!r}")

    @classmethod
    def from_per_entry(cls, per_entry: float, n: int) -> "BudgetSpec":
        if n <= 0:
            raise EmptySetError("a per-entry budget needs at least one entry")
        return cls(float(per_entry) * n)

    def per_entry(self, n: int) -> float:
        return self.total / n


@dataclass(frozen=True)
class Segment:
    """Half-open score interval [low, high) whose entries are reinforced to high."""
    low: float
    high: float

    def __post_init__(self):
        if not (0 <= self.low < self.high):
            raise DomainError(f"invalid segment [{self.low}, {self.high})")

    @property
    def target(self) -> float:
        return self.high

    def __contains__(self, score: float) -> bool:
        return self.low <= score < self.high

    def covers(self, other: "Segment", tolerance: float = 0.0) -> bool:
        return self.low <= other.low + tolerance and other.high <= self.high + tolerance


class SegmentList(abc.Sequence):
    """
    Disjoint segments held as two aligned arrays; Segment objects are built
    only when an element is read.
    """

    def __init__(self, lows: ArrayLike, highs: ArrayLike):
        self.lows = np.asarray(lows, dtype=float).reshape(-1)
        self.highs = np.asarray(highs, dtype=float).reshape(-1)
        if self.lows.shape != self.highs.shape:
            raise DomainError("segment bounds must have the same length")
        if np.any(self.lows < 0) or np.any(self.lows >= self.highs):
            raise DomainError("every segment needs 0 <= low < high")

    @classmethod
    def of(cls, segments: Iterable[Segment]) -> "SegmentList":
        if isinstance(segments, SegmentList):
            return segments
        segments = list(segments)
        return cls([s.low for s in segments], [s.high for s in segments])

    def __len__(self) -> int:
        return int(self.lows.size)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return SegmentList(self.lows[i], self.highs[i])
        return Segment(float(self.lows[i]), float(self.highs[i]))

    def __iter__(self):
        for low, high in zip(self.lows.tolist(), self.highs.tolist()):
            yield Segment(low, high)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (SegmentList, list, tuple)):
            return NotImplemented
        other = SegmentList.of(other)
        return bool(np.array_equal(self.lows, other.lows) and np.array_equal(self.highs, other.highs))

    def __repr__(self):
        return f"SegmentList({len(self)} segments)"

    def high_of(self, scores: ArrayLike) -> np.ndarray:
        """High end of the segment holding each score, NaN where none does."""
        arr = np.asarray(scores, dtype=float)
        order = np.argsort(self.lows, kind="stable")
        lows, highs = self.lows[order], self.highs[order]
        pos = np.searchsorted(lows, arr, side="right") - 1
        if lows.size == 0:
            return np.full(arr.shape, np.nan)
        pos_c = np.maximum(pos, 0)
        inside = (pos >= 0) & (arr < highs[pos_c])
        return np.where(inside, highs[pos_c], np.nan)
