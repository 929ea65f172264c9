"""
Conversion between JSON documents and domain objects.

Purpose:
- instance files (InstanceDoc) -> TypeSpace + FeasibilitySystem and back
- menus and mechanism tables -> documents for `lp` / `pricing` outputs
- pydantic validation errors surface as the lab's ValidationError
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pydantic

from lottery_gap_lab.common.errors import ValidationError
from lottery_gap_lab.common.numeric import to_json_number
from lottery_gap_lab.contracts.instances import (
    DistributionDoc,
    FeasibilityDoc,
    InstanceDoc,
    MatroidDoc,
    TypeSpaceDoc,
)
from lottery_gap_lab.contracts.menus import LotteryDoc, MechanismTableDoc, MenuDoc, ProfileRowDoc
from lottery_gap_lab.dist.distributions import DiscreteDist, make_discrete
from lottery_gap_lab.dist.type_space import (
    TypeSpace,
    additive_type_space,
    explicit_type_space,
    product_type_space,
)
from lottery_gap_lab.domain.enums import FeasibilityKind, MatroidKind, NumericMode, Structure
from lottery_gap_lab.feas.matroids import MatroidOracle, from_mask
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.lotteries import LotteryMenu, ProbabilityCap
from lottery_gap_lab.mech.tables import MechanismTable


@dataclass(frozen=True, eq=False)
class LoadedInstance:
    doc: InstanceDoc
    ts: TypeSpace
    fs: FeasibilitySystem | None

    @property
    def instance_id(self) -> str:
        return self.doc.instance_id

    @property
    def setting(self) -> int:
        return self.doc.setting


# =============================================================================
# distributions / type spaces
# =============================================================================
def dist_to_doc(d: DiscreteDist) -> DistributionDoc:
    return DistributionDoc(
        support=[to_json_number(x) for x in d.support],
        probs=[to_json_number(p) for p in d.probs],
    )


def dist_from_doc(doc: DistributionDoc, mode: NumericMode) -> DiscreteDist:
    return make_discrete(doc.support, doc.probs, mode)


def type_space_from_doc(
    doc: TypeSpaceDoc, mode: NumericMode, max_profiles: int | None = None
) -> TypeSpace:
    if doc.kind is Structure.product:
        rows = [[dist_from_doc(d, mode) for d in row] for row in doc.dists or []]
        return product_type_space(rows, mode, max_profiles=max_profiles)
    if doc.kind is Structure.additive:
        return additive_type_space(
            [dist_from_doc(d, mode) for d in doc.t_dists or []], mode, max_profiles=max_profiles
        )
    return explicit_type_space(doc.types or [], doc.probs or [], mode)


def type_space_to_doc(ts: TypeSpace) -> TypeSpaceDoc:
    if ts.structure is Structure.product and ts.item_dists is not None:
        return TypeSpaceDoc(
            kind=Structure.product,
            n=ts.n,
            m=ts.m,
            dists=[[dist_to_doc(d) for d in row] for row in ts.item_dists],
        )
    if ts.structure is Structure.additive and ts.base_dists is not None:
        return TypeSpaceDoc(
            kind=Structure.additive, n=1, m=ts.m, t_dists=[dist_to_doc(d) for d in ts.base_dists]
        )
    agent = ts.agents[0]
    return TypeSpaceDoc(
        kind=Structure.explicit,
        n=1,
        m=ts.m,
        types=[[to_json_number(x) for x in row] for row in agent.values],
        probs=[to_json_number(p) for p in agent.probs],
    )


# =============================================================================
# feasibility
# =============================================================================
def matroid_from_doc(doc: MatroidDoc) -> MatroidOracle:
    if doc.kind is MatroidKind.uniform:
        return MatroidOracle.uniform(doc.size, int(doc.rank or 0))
    if doc.kind is MatroidKind.partition:
        return MatroidOracle.partition(doc.size, doc.blocks or [], doc.capacities or [])
    if doc.kind is MatroidKind.explicit:
        return MatroidOracle.explicit(doc.size, doc.independent_sets or [])
    return MatroidOracle.free(doc.size)


def matroid_to_doc(oracle: MatroidOracle) -> MatroidDoc:
    if oracle.kind is MatroidKind.uniform:
        return MatroidDoc(kind=oracle.kind, size=oracle.size, rank=oracle.rank_limit)
    if oracle.kind is MatroidKind.partition:
        blocks: list[list[int]] = [[] for _ in oracle.capacities or ()]
        for e, b in enumerate(oracle.block_of or ()):
            blocks[b].append(e)
        return MatroidDoc(
            kind=oracle.kind, size=oracle.size, blocks=blocks, capacities=list(oracle.capacities or ())
        )
    if oracle.kind is MatroidKind.explicit:
        sets = sorted(list(from_mask(mask)) for mask in oracle.independent_masks or ())
        return MatroidDoc(kind=oracle.kind, size=oracle.size, independent_sets=sets)
    return MatroidDoc(kind=oracle.kind, size=oracle.size)


def feasibility_from_doc(doc: FeasibilityDoc) -> FeasibilitySystem:
    if doc.kind is FeasibilityKind.matching:
        return FeasibilitySystem.matching(doc.n, doc.capacities or [])
    return FeasibilitySystem.general(doc.n, doc.m, matroid_from_doc(doc.matroid))


def feasibility_to_doc(fs: FeasibilitySystem) -> FeasibilityDoc:
    if fs.kind is FeasibilityKind.matching:
        return FeasibilityDoc(kind=fs.kind, n=fs.n, m=fs.m, capacities=list(fs.capacities or ()))
    return FeasibilityDoc(kind=fs.kind, n=fs.n, m=fs.m, matroid=matroid_to_doc(fs.j1))


# =============================================================================
# instances
# =============================================================================
def instance_from_doc(
    doc: InstanceDoc, mode: NumericMode | None = None, max_profiles: int | None = None
) -> LoadedInstance:
    mode = mode or doc.mode
    ts = type_space_from_doc(doc.type_space, mode, max_profiles)
    fs = feasibility_from_doc(doc.feasibility) if doc.feasibility is not None else None
    if fs is not None and (fs.n != ts.n or fs.m != ts.m):
        raise ValidationError(
            "feasibility and type space disagree",
            {"instance_id": doc.instance_id, "fs": [fs.n, fs.m], "ts": [ts.n, ts.m]},
        )
    if doc.setting >= 3 and fs is None:
        raise ValidationError("multi-agent settings need a feasibility block", {"instance_id": doc.instance_id})
    return LoadedInstance(doc, ts, fs)


def parse_instance(raw: dict[str, Any]) -> InstanceDoc:
    try:
        return InstanceDoc.model_validate(raw)
    except pydantic.ValidationError as e:
        raise ValidationError("invalid instance document", {"errors": e.errors(include_url=False)[:5]}) from e


def load_instance(
    path: str | Path, mode: NumericMode | None = None, max_profiles: int | None = None
) -> LoadedInstance:
    p = Path(path)
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError("cannot read instance file", {"path": str(p), "error": str(e)[:200]}) from e
    return instance_from_doc(parse_instance(raw), mode, max_profiles)


def write_instance(path: str | Path, doc: InstanceDoc) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(json.dumps(doc.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return p


# =============================================================================
# menus / tables
# =============================================================================
def menu_to_doc(menu: LotteryMenu) -> MenuDoc:
    return MenuDoc(
        cap=menu.cap.label,
        lotteries=[
            LotteryDoc(q=[to_json_number(x) for x in lot.q], p=to_json_number(lot.p))
            for lot in menu.lotteries
        ],
    )


def menu_from_doc(doc: MenuDoc, mode: NumericMode) -> LotteryMenu:
    if not doc.lotteries:
        raise ValidationError("menu document has no lotteries")
    m = len(doc.lotteries[0].q)
    cap = ProbabilityCap.lifted(m) if doc.cap == "lifted" else ProbabilityCap.unit(m)
    return LotteryMenu.of([(lot.q, lot.p) for lot in doc.lotteries], m, mode, cap)


def table_to_doc(table: MechanismTable, ts: TypeSpace) -> MechanismTableDoc:
    rows = []
    for prof in ts.profiles():
        k = prof.index
        rows.append(
            ProfileRowDoc(
                index=k,
                values=[[to_json_number(x) for x in row] for row in prof.values],
                prob=to_json_number(prof.prob),
                alloc=[[to_json_number(x) for x in row] for row in table.alloc[k]],
                payments=[to_json_number(x) for x in table.payments[k]],
            )
        )
    return MechanismTableDoc(mode=ts.mode, n=ts.n, m=ts.m, profiles=rows)
