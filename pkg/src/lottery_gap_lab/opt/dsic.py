"""
Revenue-optimal dominant-strategy mechanism by linear programming.

Variables q_ij(v) in [0,1] and free payments pi_i(v) per profile; DSIC and IR
rows per agent, opponent profile and report pair; feasibility rows per profile
(agent and item rows under the matching tag, rank rows of every dependent
subset otherwise).
"""

from __future__ import annotations

import numpy as np

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import CapacityError, ValidationError
from lottery_gap_lab.common.logging import get_project_logger
from lottery_gap_lab.common.numeric import as_array, is_rational
from lottery_gap_lab.dist.type_space import TypeSpace
from lottery_gap_lab.domain.enums import FeasibilityKind
from lottery_gap_lab.feas.system import FeasibilitySystem
from lottery_gap_lab.mech.tables import MechanismTable
from lottery_gap_lab.opt.lp import STATUS_RATIONALIZED, LinearProgram, LpSolution, solve

log = get_project_logger()


def _feasibility_rows(fs: FeasibilitySystem) -> list[tuple[tuple[int, ...], int]]:
    if fs.kind is FeasibilityKind.matching:
        # rows follow the bipartite endpoints, so the copies view gets the parent's rows
        pairs = [fs.element(e) if fs.pairs is None else fs.pairs[e] for e in range(fs.size)]
        agents: dict[int, list[int]] = {}
        items: dict[int, list[int]] = {}
        for e, (agent, item) in enumerate(pairs):
            agents.setdefault(agent, []).append(e)
            items.setdefault(item, []).append(e)
        rows = [(tuple(es), 1) for _, es in sorted(agents.items()) if len(es) > 1]
        rows += [
            (tuple(es), fs.capacities[item])
            for item, es in sorted(items.items())
            if fs.capacities[item] < len(es)
        ]
        return rows
    return [(subset, r) for subset, r in fs.dependent_subsets]


def _estimated_rows(ts: TypeSpace, feas_rows: int) -> int:
    p = ts.num_profiles
    ic = sum(p * (t - 1) for t in ts.shape)
    return ic + p * ts.n + p * feas_rows


def build_dsic_lp(ts: TypeSpace, fs: FeasibilitySystem) -> LinearProgram:
    if fs.n != ts.n or fs.m != ts.m:
        raise ValidationError(
            "feasibility system and type space disagree", {"fs": [fs.n, fs.m], "ts": [ts.n, ts.m]}
        )
    feas_rows = _feasibility_rows(fs)
    estimate = _estimated_rows(ts, len(feas_rows))
    cap = get_settings().lp_max_rows
    if estimate > cap:
        raise CapacityError("DSIC LP would exceed the row cap", {"rows": estimate, "cap": cap})

    n, m = ts.n, ts.m
    probs = ts.all_probs
    lp = LinearProgram(name="optimal_dsic", mode=ts.mode)
    q = np.empty((ts.num_profiles, n, m), dtype=np.int64)
    pay = np.empty((ts.num_profiles, n), dtype=np.int64)
    for k in range(ts.num_profiles):
        for i in range(n):
            for j in range(m):
                q[k, i, j] = lp.add_var(f"q_{k}_{i}_{j}", lower=0, upper=1)
            pay[k, i] = lp.add_var(f"pi_{k}_{i}", lower=None, obj=probs[k])

    for i in range(n):
        inv = ts.profile_lookup(i)
        vals = ts.agents[i].values
        t_count, r_count = inv.shape
        for r in range(r_count):
            for t in range(t_count):
                kt = inv[t, r]
                vt = vals[t]
                ir = {int(q[kt, i, j]): -vt[j] for j in range(m)}
                ir[int(pay[kt, i])] = 1
                lp.add_le(ir, 0, name=f"ir_{i}_{r}_{t}")
                for s in range(t_count):
                    if s == t:
                        continue
                    ks = inv[s, r]
                    row = {}
                    for j in range(m):
                        row[int(q[ks, i, j])] = vt[j]
                        row[int(q[kt, i, j])] = -vt[j]
                    row[int(pay[ks, i])] = -1
                    row[int(pay[kt, i])] = 1
                    lp.add_le(row, 0, name=f"ic_{i}_{r}_{t}_{s}")

    for k in range(ts.num_profiles):
        for f, (subset, rank) in enumerate(feas_rows):
            coeffs = {int(q[k, e // m, e % m]): 1 for e in subset}
            lp.add_le(coeffs, rank, name=f"feas_{k}_{f}")
    return lp


def optimal_dsic_lp(ts: TypeSpace, fs: FeasibilitySystem) -> tuple[MechanismTable, LpSolution]:
    lp = build_dsic_lp(ts, fs)
    sol = solve(lp, ts.mode)
    if is_rational(ts.mode) and sol.status == STATUS_RATIONALIZED:
        raise CapacityError(
            "DSIC LP too large for an exact optimum; rerun in float mode",
            {"vars": lp.num_vars, "rows": lp.num_rows},
        )

    n, m = ts.n, ts.m
    values = sol.values
    alloc = [[[values[lp.var(f"q_{k}_{i}_{j}")] for j in range(m)] for i in range(n)] for k in range(ts.num_profiles)]
    pay = [[values[lp.var(f"pi_{k}_{i}")] for i in range(n)] for k in range(ts.num_profiles)]
    alloc_arr = as_array(alloc, ts.mode)
    if not is_rational(ts.mode):
        alloc_arr = np.clip(alloc_arr, 0.0, 1.0)
    table = MechanismTable(ts.shape, alloc_arr, as_array(pay, ts.mode), ts.mode)

    log.info(
        "dsic_lp_solved",
        extra={
            "payload": {
                "agents": n,
                "items": m,
                "profiles": ts.num_profiles,
                "feasibility": fs.kind.value,
                "status": sol.status,
                "backend": sol.backend,
                "objective": float(sol.objective),
            }
        },
    )
    return table, sol
