"""
Instance and experiment documents (pydantic models).

Purpose:
- validation of instance files read by the CLI
- stable JSON layout for generated instances
- numbers are ints, floats or exact "p/q" strings
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from lottery_gap_lab.domain.enums import FeasibilityKind, MatroidKind, NumericMode, Structure

from .versions import INSTANCE_SCHEMA_VERSION, SUPPORTED_INSTANCE_VERSIONS

JsonNumber = int | float | str


# =============================================================================
# DISTRIBUTIONS / TYPE SPACES
# =============================================================================
class DistributionDoc(BaseModel):
    support: list[JsonNumber]
    probs: list[JsonNumber]

    @model_validator(mode="after")
    def _aligned(self) -> DistributionDoc:
        if not self.support or len(self.support) != len(self.probs):
            raise ValueError("support and probs must be nonempty and of equal length")
        return self


class TypeSpaceDoc(BaseModel):
    kind: Structure
    n: int = Field(default=1, ge=1)
    m: int = Field(ge=1)

    # product: dists[i][j]
    dists: list[list[DistributionDoc]] | None = None
    # additive: t_0..t_m
    t_dists: list[DistributionDoc] | None = None
    # explicit: one valuation vector per type
    types: list[list[JsonNumber]] | None = None
    probs: list[JsonNumber] | None = None

    @model_validator(mode="after")
    def _payload_matches_kind(self) -> TypeSpaceDoc:
        if self.kind is Structure.product:
            if self.dists is None or len(self.dists) != self.n:
                raise ValueError("product type space needs dists with n rows")
            if any(len(row) != self.m for row in self.dists):
                raise ValueError("product type space needs m dists per agent")
        elif self.kind is Structure.additive:
            if self.n != 1:
                raise ValueError("additive type spaces are single-agent")
            if self.t_dists is None or len(self.t_dists) != self.m + 1:
                raise ValueError("additive type space needs m+1 t_dists")
        else:
            if self.n != 1:
                raise ValueError("explicit type spaces are single-agent")
            if not self.types or self.probs is None or len(self.types) != len(self.probs):
                raise ValueError("explicit type space needs aligned types and probs")
            if any(len(t) != self.m for t in self.types):
                raise ValueError("explicit types must have m values")
        return self


# =============================================================================
# FEASIBILITY
# =============================================================================
class MatroidDoc(BaseModel):
    """
    Matroid over ground elements 0..size-1 (element (i, j) is i*m + j).
    """

    kind: MatroidKind
    size: int = Field(ge=0)
    rank: int | None = None
    blocks: list[list[int]] | None = None
    capacities: list[int] | None = None
    independent_sets: list[list[int]] | None = None

    @model_validator(mode="after")
    def _payload_matches_kind(self) -> MatroidDoc:
        if self.kind is MatroidKind.uniform and self.rank is None:
            raise ValueError("uniform matroid needs rank")
        if self.kind is MatroidKind.partition:
            if self.blocks is None or self.capacities is None:
                raise ValueError("partition matroid needs blocks and capacities")
            if len(self.blocks) != len(self.capacities):
                raise ValueError("blocks and capacities must align")
        if self.kind is MatroidKind.explicit and self.independent_sets is None:
            raise ValueError("explicit matroid needs independent_sets")
        return self


class FeasibilityDoc(BaseModel):
    kind: FeasibilityKind
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    capacities: list[int] | None = None
    matroid: MatroidDoc | None = None

    @model_validator(mode="after")
    def _payload_matches_kind(self) -> FeasibilityDoc:
        if self.kind is FeasibilityKind.matching:
            if self.capacities is None or len(self.capacities) != self.m:
                raise ValueError("matching feasibility needs m capacities")
        elif self.matroid is None:
            raise ValueError("general feasibility needs a matroid")
        return self


# =============================================================================
# INSTANCES / EXPERIMENTS
# =============================================================================
class InstanceDoc(BaseModel):
    api_version: str = Field(default=INSTANCE_SCHEMA_VERSION)
    instance_id: str
    setting: int = Field(ge=1, le=4)
    seed: int | None = None
    index: int | None = None
    mode: NumericMode = NumericMode.rational

    type_space: TypeSpaceDoc
    feasibility: FeasibilityDoc | None = None

    @field_validator("api_version")
    @classmethod
    def _known_version(cls, v: str) -> str:
        if v not in SUPPORTED_INSTANCE_VERSIONS:
            raise ValueError(f"unsupported instance schema version: {v}")
        return v


class ExperimentConfig(BaseModel):
    seed: int = 1
    setting: int = Field(default=1, ge=1, le=4)
    n: int = Field(default=1, ge=1)
    m: int = Field(default=2, ge=1)
    support: int = Field(default=2, ge=1, le=11)
    count: int = Field(default=10, ge=1)
    k_max: int = Field(default=2, ge=1)
    value_max: int = Field(default=10, ge=1)
    j1_kind: Literal["uniform", "partition"] = "uniform"
    mode: NumericMode = NumericMode.rational
    out: str = "./reports/run"
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _sizes_fit_setting(self) -> ExperimentConfig:
        if self.setting in (1, 2) and self.n != 1:
            raise ValueError("settings 1 and 2 are single-agent")
        if self.support > self.value_max + 1:
            raise ValueError("support size exceeds the value grid")
        return self
