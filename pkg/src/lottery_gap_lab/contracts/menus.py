"""
Menu and mechanism-table documents.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from lottery_gap_lab.domain.enums import NumericMode

from .instances import JsonNumber
from .versions import MENU_SCHEMA_VERSION


class LotteryDoc(BaseModel):
    q: list[JsonNumber]
    p: JsonNumber


class MenuDoc(BaseModel):
    api_version: str = Field(default=MENU_SCHEMA_VERSION)
    cap: Literal["unit", "lifted"] = "unit"
    lotteries: list[LotteryDoc]


class ProfileRowDoc(BaseModel):
    index: int
    values: list[list[JsonNumber]]
    prob: JsonNumber
    alloc: list[list[JsonNumber]]
    payments: list[JsonNumber]


class MechanismTableDoc(BaseModel):
    api_version: str = Field(default=MENU_SCHEMA_VERSION)
    mode: NumericMode
    n: int
    m: int
    profiles: list[ProfileRowDoc]
