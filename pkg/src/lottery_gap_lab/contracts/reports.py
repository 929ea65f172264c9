"""
Report documents (GapReport / RunReport JSON).

Purpose:
- deterministic JSON layout for check runs
- per-inequality aggregates consistent with per-instance rows
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from lottery_gap_lab.domain.enums import InequalityScope

from .instances import ExperimentConfig, JsonNumber
from .versions import REPORT_SCHEMA_VERSION


class InequalityRowDoc(BaseModel):
    inequality: str
    scope: InequalityScope
    lhs: JsonNumber
    rhs: JsonNumber
    slack: JsonNumber
    ratio: float | None = None
    passed: bool
    witness_profile: list[list[JsonNumber]] | None = None
    violations: int = 0
    note: str = ""


class GapReportDoc(BaseModel):
    api_version: str = Field(default=REPORT_SCHEMA_VERSION)
    instance_id: str
    setting: int
    passed: bool
    rows: list[InequalityRowDoc]
    metrics: dict[str, JsonNumber] = Field(default_factory=dict)


class AggregateRowDoc(BaseModel):
    inequality: str
    scope: InequalityScope
    count: int
    failures: int
    min_slack: JsonNumber
    min_slack_instance: str
    worst_ratio: float | None = None
    worst_ratio_instance: str | None = None


class InstanceErrorDoc(BaseModel):
    instance_id: str
    code: str
    message: str
    details: dict[str, Any] | None = None


class RunReportDoc(BaseModel):
    api_version: str = Field(default=REPORT_SCHEMA_VERSION)
    run_id: str
    app_env: str
    config: ExperimentConfig
    passed: bool
    instances: int
    failures: int
    reports: list[GapReportDoc]
    aggregates: list[AggregateRowDoc]
    errors: list[InstanceErrorDoc] = Field(default_factory=list)


# =============================================================================
# REPRODUCTIONS
# =============================================================================
class RefinementPointDoc(BaseModel):
    grid: int
    menu_revenue: float
    r1_mass: float


class AppendixReproDoc(BaseModel):
    api_version: str = Field(default=REPORT_SCHEMA_VERSION)
    n: int
    grid: int
    mode: str
    menu: list[list[float]]
    menu_revenue: float
    region_masses: dict[str, float]
    copies_upper_bound: float
    ratio: float
    myerson_copies: float
    refinement: list[RefinementPointDoc] = Field(default_factory=list)
    refinement_monotone: bool | None = None
    checks: dict[str, bool] = Field(default_factory=dict)
    passed: bool


class Uniform56ReproDoc(BaseModel):
    api_version: str = Field(default=REPORT_SCHEMA_VERSION)
    step: str
    mode: str
    symmetric_price: float
    pricing_revenue: float
    lottery_price: float
    augmented_revenue: float
    region_masses: dict[str, float]
    lp_step: str
    lp_menu_revenue: float
    lp_menu_size: int
    lp_augmented_revenue: float
    checks: dict[str, bool] = Field(default_factory=dict)
    passed: bool
