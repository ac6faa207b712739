import hashlib
import json
import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, field_validator, model_validator

from .iterative_solver import ReinforcementPlan
from .score_model import (
    BudgetSpec,
    ComplementModel,
    EmpiricalComplement,
    ExponentialComplement,
    LogNormalComplement,
    PiecewiseLinearComplement,
    SupportedSet,
)

# This file contains the Pydantic models (schemas) for the two documents the
# CLI reads and writes: an instance to solve and the plan that solves it.

# --- Schemas for the complement ---

class ExponentialParams(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)
    lambda_: PositiveFloat = Field(alias="lambda")


class LogNormalParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    mu: float
    sigma: PositiveFloat


class PiecewiseLinearParams(BaseModel):
    model_config = ConfigDict(extra="forbid")
    points: List[Tuple[float, float]] = Field(min_length=1)


class ComplementSpec(BaseModel):
    """
    Tagged union: exactly one of the four keys must be present.
    """
    model_config = ConfigDict(extra="forbid")
    empirical: Optional[List[PositiveFloat]] = None
    exponential: Optional[ExponentialParams] = None
    lognormal: Optional[LogNormalParams] = None
    piecewise_linear_cdf: Optional[PiecewiseLinearParams] = None

    @field_validator("empirical")
    @classmethod
    def _non_empty(cls, value):
        if value is not None and len(value) == 0:
            raise ValueError("empty complement")
        return value

    @model_validator(mode="after")
    def _exactly_one(self):
        given = [k for k in ("empirical", "exponential", "lognormal", "piecewise_linear_cdf")
                 if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError(
                "complement must have exactly one of empirical, exponential, lognormal, "
                f"piecewise_linear_cdf (got {given or 'none'})"
            )
        return self

    def to_model(self) -> ComplementModel:
        if self.empirical is not None:
            return EmpiricalComplement(self.empirical)
        if self.exponential is not None:
            return ExponentialComplement(self.exponential.lambda_)
        if self.lognormal is not None:
            return LogNormalComplement(self.lognormal.mu, self.lognormal.sigma)
        return PiecewiseLinearComplement(self.piecewise_linear_cdf.points)


# --- Schemas for the instance ---

class BudgetSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")
    total: Optional[float] = Field(default=None, ge=0)
    per_entry: Optional[float] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.total is None) == (self.per_entry is None):
            raise ValueError("budget must have exactly one of total, per_entry")
        return self

    def to_spec(self, n: int) -> BudgetSpec:
        if self.total is not None:
            return BudgetSpec(self.total)
        return BudgetSpec.from_per_entry(self.per_entry, n)


class InstanceFile(BaseModel):
    """
    An optimisation instance as read from JSON.
    """
    model_config = ConfigDict(extra="forbid")
    supported: List[PositiveFloat] = Field(min_length=1)
    complement: ComplementSpec
    budget: BudgetSchema
    epsilon: Optional[float] = Field(default=None, ge=0)

    def supported_set(self) -> SupportedSet:
        return SupportedSet.from_scores(self.supported)

    def complement_model(self) -> ComplementModel:
        return self.complement.to_model()

    def budget_spec(self) -> BudgetSpec:
        return self.budget.to_spec(len(self.supported))

    def canonical(self) -> str:
        return json.dumps(self.model_dump(by_alias=True, exclude_none=True), sort_keys=True, separators=(",", ":"))


def instance_hash(instance: InstanceFile) -> str:
    """sha256 of the canonical JSON form; ties a plan file to the instance it solves."""
    return hashlib.sha256(instance.canonical().encode("utf-8")).hexdigest()


# --- Schemas for the plan ---

class AssignmentRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    from_: float = Field(alias="from")
    to: float


class PromotionRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)
    from_: float = Field(alias="from")
    to: float
    count: int = Field(ge=0)


class CollinearRow(BaseModel):
    score: float
    kind: Literal["collinear-target", "collinear-source"]


class SegmentRow(BaseModel):
    low: float
    high: float


class PlanFile(BaseModel):
    """
    A solved plan. alpha_final is null when no gradient was needed (zero budget).
    """
    assignments: List[AssignmentRow]
    budget_total: float
    budget_used: float
    slack: float
    alpha_final: Optional[float]
    log_alpha_final: Optional[float] = None
    targets: List[float] = []
    collinear: List[CollinearRow] = []
    collinear_promotions: List[PromotionRow] = []
    segments: List[SegmentRow] = []
    utility_before: float
    utility_after: float
    solver: Literal["iterative", "unimodal", "oracle"]
    instance_hash: Optional[str] = None

    @field_validator("assignments")
    @classmethod
    def _sorted(cls, rows):
        froms = [r.from_ for r in rows]
        if froms != sorted(froms):
            raise ValueError("assignments must be sorted by 'from' ascending")
        return rows

    @classmethod
    def from_plan(cls, plan: ReinforcementPlan, instance_hash: Optional[str] = None) -> "PlanFile":
        pairs = plan.assignments.pairs()
        return cls(
            assignments=[AssignmentRow(from_=a, to=b) for a, b in pairs],
            budget_total=plan.budget_total,
            budget_used=plan.budget_used,
            slack=plan.slack,
            alpha_final=None if math.isinf(plan.alpha_final) else plan.alpha_final,
            log_alpha_final=plan.log_alpha_final,
            targets=list(plan.targets),
            collinear=[CollinearRow(score=s, kind=k) for s, k in sorted(plan.collinear.items())],
            collinear_promotions=[
                PromotionRow(from_=p.source, to=p.destination, count=p.count) for p in plan.collinear_promotions
            ],
            segments=[SegmentRow(low=s.low, high=s.high) for s in plan.segments],
            utility_before=plan.utility_before,
            utility_after=plan.utility_after,
            solver=plan.solver,
            instance_hash=instance_hash,
        )

    def pairs(self) -> List[Tuple[float, float]]:
        return [(r.from_, r.to) for r in self.assignments]

    def to_json(self) -> str:
        # json.dumps writes floats with repr, which round-trips exactly
        return json.dumps(self.model_dump(by_alias=True), indent=2)


def load_instance(text: str) -> InstanceFile:
    """Raises pydantic.ValidationError (a ValueError) on malformed JSON or schema violations."""
    return InstanceFile.model_validate_json(text)


def load_plan(text: str) -> PlanFile:
    return PlanFile.model_validate_json(text)
