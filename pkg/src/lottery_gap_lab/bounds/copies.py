"""
Copies (pseudo-agent) instance of a unit-demand instance.

Agent i is split into m single-parameter pseudo-agents a = i*m + j with value
distribution F_ij; the feasibility system carries over on the same ground set.
For product type spaces the copies' profile order equals the parent's, so
per-profile quantities line up index by index.
"""

from __future__ import annotations

from dataclasses import dataclass

from lottery_gap_lab.common.errors import InvariantViolation, ValidationError
from lottery_gap_lab.common.numeric import Number
from lottery_gap_lab.dist.distributions import DiscreteDist
from lottery_gap_lab.dist.type_space import TypeSpace, product_type_space
from lottery_gap_lab.domain.enums import Structure
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.tables import MechanismTable
from lottery_gap_lab.opt.myerson import myerson, myerson_single_item_revenue


@dataclass(frozen=True, eq=False)
class CopiesInstance:
    parent: TypeSpace
    fs: FeasibilitySystem
    dists: tuple[DiscreteDist, ...]

    @property
    def n(self) -> int:
        return self.parent.n

    @property
    def m(self) -> int:
        return self.parent.m

    @property
    def size(self) -> int:
        return len(self.dists)

    def pseudo_agent(self, a: int) -> tuple[int, int]:
        return a // self.m, a % self.m

    def feasibility(self) -> FeasibilitySystem:
        return self.fs.copies_view()

    def single_item_space(self) -> TypeSpace:
        """nm agents, one item each; same profile order as the parent."""
        ts = product_type_space(
            [[d] for d in self.dists], self.parent.mode, max_profiles=self.parent.max_profiles
        )
        if ts.num_profiles != self.parent.num_profiles:
            raise InvariantViolation(
                "copies profile count differs from the parent",
                {"copies": ts.num_profiles, "parent": self.parent.num_profiles},
            )
        return ts

    def myerson(self) -> tuple[MechanismTable, Number]:
        return myerson(self.single_item_space(), self.feasibility())

    def is_single_sale(self) -> bool:
        """Exactly one pseudo-agent may be served (single agent or single item, capacity 1)."""
        fs = self.fs
        if self.n == 1:
            return True
        return fs.capacities is not None and fs.m == 1 and fs.capacities[0] == 1

    def myerson_single_sale_revenue(self) -> Number:
        if not self.is_single_sale():
            raise ValidationError("closed-form Myerson needs a single-sale copies instance")
        return myerson_single_item_revenue(self.dists)


def build_copies(ts: TypeSpace, fs: FeasibilitySystem | None = None) -> CopiesInstance:
    """Pseudo-agent (i, j) gets the marginal F_ij; single agents default to unit demand."""
    if ts.structure is not Structure.product or ts.item_dists is None:
        raise ValidationError(
            "copies need independent item values (product type space)",
            {"structure": ts.structure.value},
        )
    if fs is None:
        if ts.n != 1:
            raise ValidationError("multi-agent copies need a feasibility system")
        fs = FeasibilitySystem.matching(1, [1] * ts.m)
    if fs.n != ts.n or fs.m != ts.m:
        raise ValidationError("feasibility system and type space disagree")
    dists = tuple(ts.item_dists[i][j] for i in range(ts.n) for j in range(ts.m))
    return CopiesInstance(ts, fs, dists)
