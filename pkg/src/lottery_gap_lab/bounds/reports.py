"""
Inequality rows and per-instance gap reports.

Purpose:
- one row per checked inequality: lhs, rhs, slack (rhs - lhs), ratio, pass flag
- pointwise rows keep the worst profile as witness
- conversion to the JSON contracts
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from lottery_gap_lab.common.numeric import Number, is_rational, scaled_tolerance, to_json_number, zero
from lottery_gap_lab.contracts.reports import GapReportDoc, InequalityRowDoc
from lottery_gap_lab.domain.enums import InequalityScope, NumericMode


@dataclass(frozen=True)
class InequalityRow:
    inequality: str
    scope: InequalityScope
    lhs: Number
    rhs: Number
    slack: Number
    ratio: float | None
    passed: bool
    witness_profile: list[list[Number]] | None = None
    violations: int = 0
    note: str = ""

    def to_doc(self) -> InequalityRowDoc:
        witness = None
        if self.witness_profile is not None:
            witness = [[to_json_number(x) for x in row] for row in self.witness_profile]
        return InequalityRowDoc(
            inequality=self.inequality,
            scope=self.scope,
            lhs=to_json_number(self.lhs),
            rhs=to_json_number(self.rhs),
            slack=to_json_number(self.slack),
            ratio=self.ratio,
            passed=self.passed,
            witness_profile=witness,
            violations=self.violations,
            note=self.note,
        )


@dataclass
class GapReport:
    instance_id: str
    setting: int
    rows: list[InequalityRow] = field(default_factory=list)
    metrics: dict[str, Number] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[InequalityRow]:
        return [r for r in self.rows if not r.passed]

    def row(self, inequality: str) -> InequalityRow:
        for r in self.rows:
            if r.inequality == inequality:
                return r
        raise KeyError(inequality)

    def extend(self, rows: Sequence[InequalityRow]) -> None:
        self.rows.extend(rows)

    def to_doc(self) -> GapReportDoc:
        return GapReportDoc(
            instance_id=self.instance_id,
            setting=self.setting,
            passed=self.passed,
            rows=[r.to_doc() for r in self.rows],
            metrics={k: to_json_number(v) for k, v in self.metrics.items()},
        )


# =============================================================================
# row builders
# =============================================================================
def _ratio(lhs: Number, rhs: Number) -> float | None:
    if rhs > 0:
        return float(lhs) / float(rhs)
    return None


def _within(slack: Number, lhs: Number, rhs: Number, mode: NumericMode) -> bool:
    return slack >= -scaled_tolerance(mode, max(abs(float(lhs)), abs(float(rhs))))


def expectation_row(
    inequality: str, lhs: Number, rhs: Number, mode: NumericMode, note: str = ""
) -> InequalityRow:
    """lhs <= rhs for two scalars."""
    slack = rhs - lhs
    return InequalityRow(
        inequality=inequality,
        scope=InequalityScope.expectation,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        ratio=_ratio(lhs, rhs),
        passed=_within(slack, lhs, rhs, mode),
        note=note,
    )


def equality_row(
    inequality: str,
    lhs: Number,
    rhs: Number,
    mode: NumericMode,
    note: str = "",
    scope: InequalityScope = InequalityScope.expectation,
) -> InequalityRow:
    gap = abs(rhs - lhs)
    return InequalityRow(
        inequality=inequality,
        scope=scope,
        lhs=lhs,
        rhs=rhs,
        slack=-gap,
        ratio=_ratio(lhs, rhs),
        passed=_within(-gap, lhs, rhs, mode),
        note=note,
    )


def count_row(
    inequality: str,
    violations: int,
    note: str = "",
    witness: list[list[Number]] | None = None,
) -> InequalityRow:
    """Structural check: passes iff nothing was violated."""
    return InequalityRow(
        inequality=inequality,
        scope=InequalityScope.pointwise,
        lhs=violations,
        rhs=0,
        slack=-violations,
        ratio=None,
        passed=violations == 0,
        witness_profile=witness,
        violations=violations,
        note=note,
    )


def derived_row(inequality: str, value: Number, note: str) -> InequalityRow:
    """Constant reported from checked factors; not a test by itself."""
    return InequalityRow(
        inequality=inequality,
        scope=InequalityScope.derived,
        lhs=value,
        rhs=value,
        slack=0 * value,
        ratio=1.0,
        passed=True,
        note=note,
    )


def pointwise_row(
    inequality: str,
    lhs: np.ndarray,
    rhs: np.ndarray,
    values: np.ndarray,
    mode: NumericMode,
    note: str = "",
    mask: np.ndarray | None = None,
) -> InequalityRow:
    """
    lhs[k] <= rhs[k] on every profile k (optionally only where mask is set).
    Reported lhs/rhs are those of the worst-slack profile; values[k] is its witness.
    """
    idx = np.arange(len(lhs)) if mask is None else np.flatnonzero(mask)
    if idx.size == 0:
        z = zero(mode)
        return InequalityRow(
            inequality, InequalityScope.pointwise, z, z, z, None, True, None, 0, (note + " (no profiles)").strip()
        )
    lo = lhs[idx]
    hi = rhs[idx]
    slack = hi - lo
    if is_rational(mode):
        bad = np.asarray(slack < 0, dtype=bool)
    else:
        scale = np.maximum(1.0, np.maximum(np.abs(lo.astype(float)), np.abs(hi.astype(float))))
        bad = np.asarray(slack.astype(float) < -scaled_tolerance(mode, 1.0) * scale, dtype=bool)
    worst = int(np.argmin(slack.astype(float))) if not is_rational(mode) else _argmin_exact(slack)
    ratios = [float(a) / float(b) for a, b in zip(lo, hi, strict=True) if b > 0]
    return InequalityRow(
        inequality=inequality,
        scope=InequalityScope.pointwise,
        lhs=lo[worst],
        rhs=hi[worst],
        slack=slack[worst],
        ratio=max(ratios) if ratios else None,
        passed=not bool(bad.any()),
        witness_profile=_witness(values[idx[worst]]),
        violations=int(bad.sum()),
        note=note,
    )


def _argmin_exact(xs: np.ndarray) -> int:
    best = 0
    for k in range(1, len(xs)):
        if xs[k] < xs[best]:
            best = k
    return best


def _witness(v: Any) -> list[list[Number]]:
    arr = np.asarray(v, dtype=object)
    if arr.ndim == 1:
        arr = arr[None, :]
    return [list(row) for row in arr]
