"""
Generic LP layer.

Purpose:
- LinearProgram builder: named variables with bounds, <= and = rows, maximize
- exact Fraction simplex for small LPs in rational mode
- scipy HiGHS for everything else, with residual verification
- exact vertex recovery (crossover) of HiGHS solutions in rational mode
- CPLEX LP text export for external cross-checks
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.optimize import linprog

from lottery_gap_lab.common.config import get_settings
from lottery_gap_lab.common.errors import CapacityError, SolverError, ValidationError
from lottery_gap_lab.common.logging import get_solver_logger
from lottery_gap_lab.common.metrics import LP_SOLVES_TOTAL
from lottery_gap_lab.common.numeric import Number, is_rational, rationalize, resolve_mode, to_number
from lottery_gap_lab.domain.enums import NumericMode

log = get_solver_logger()

STATUS_OPTIMAL = "optimal"
STATUS_VERTEX = "vertex"
STATUS_RATIONALIZED = "rationalized"

BACKEND_EXACT = "exact-simplex"
BACKEND_HIGHS = "highs"
BACKEND_CROSSOVER = "highs+crossover"

_ACTIVE_TOL = 1e-7
_BLAND_AFTER = 50


@dataclass
class LinearProgram:
    """maximize c.x subject to A x <= b, E x = e, lower <= x <= upper."""

    name: str = "lp"
    mode: NumericMode = NumericMode.rational
    var_names: list[str] = field(default_factory=list)
    lower: list[Number | None] = field(default_factory=list)
    upper: list[Number | None] = field(default_factory=list)
    objective: list[Number] = field(default_factory=list)
    rows: list[dict[int, Number]] = field(default_factory=list)
    rhs: list[Number] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    eq_rows: list[dict[int, Number]] = field(default_factory=list)
    eq_rhs: list[Number] = field(default_factory=list)
    eq_names: list[str] = field(default_factory=list)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.mode = resolve_mode(self.mode)

    def _num(self, x: Any) -> Number:
        return to_number(x, self.mode)

    def add_var(
        self, name: str, lower: Any | None = 0, upper: Any | None = None, obj: Any = 0
    ) -> int:
        if name in self._index:
            raise ValidationError("Duplicate LP variable", {"name": name})
        k = len(self.var_names)
        self.var_names.append(name)
        self.lower.append(None if lower is None else self._num(lower))
        self.upper.append(None if upper is None else self._num(upper))
        self.objective.append(self._num(obj))
        self._index[name] = k
        return k

    def var(self, name: str) -> int:
        return self._index[name]

    def _clean(self, coeffs: Mapping[int, Any]) -> dict[int, Number]:
        row: dict[int, Number] = {}
        for k, v in coeffs.items():
            if not 0 <= k < self.num_vars:
                raise ValidationError("LP row references unknown variable", {"var": k})
            x = self._num(v)
            if x != 0:
                row[k] = row.get(k, 0) + x
        return {k: v for k, v in row.items() if v != 0}

    def add_le(self, coeffs: Mapping[int, Any], rhs: Any, name: str | None = None) -> int:
        self.rows.append(self._clean(coeffs))
        self.rhs.append(self._num(rhs))
        self.row_names.append(name or f"r{len(self.rows) - 1}")
        return len(self.rows) - 1

    def add_eq(self, coeffs: Mapping[int, Any], rhs: Any, name: str | None = None) -> int:
        self.eq_rows.append(self._clean(coeffs))
        self.eq_rhs.append(self._num(rhs))
        self.eq_names.append(name or f"e{len(self.eq_rows) - 1}")
        return len(self.eq_rows) - 1

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.rows) + len(self.eq_rows)

    @property
    def cells(self) -> int:
        extra = sum(1 for u in self.upper if u is not None)
        free = sum(1 for lo in self.lower if lo is None)
        return (len(self.rows) + extra) * (self.num_vars + free)


@dataclass(frozen=True)
class LpSolution:
    objective: Number
    values: tuple[Number, ...]
    status: str
    backend: str
    residual: float
    iterations: int
    var_index: Mapping[str, int]

    def value(self, name: str) -> Number:
        return self.values[self.var_index[name]]

    @property
    def exact(self) -> bool:
        return self.status in {STATUS_OPTIMAL, STATUS_VERTEX} and all(
            isinstance(v, Fraction) for v in self.values
        )


# =============================================================================
# Residuals
# =============================================================================


def residual(lp: LinearProgram, x: list[Number] | tuple[Number, ...]) -> Number:
    """Largest constraint violation of x (0 when feasible)."""
    worst: Number = 0
    for row, b in zip(lp.rows, lp.rhs, strict=True):
        worst = max(worst, sum(v * x[k] for k, v in row.items()) - b)
    for row, b in zip(lp.eq_rows, lp.eq_rhs, strict=True):
        worst = max(worst, abs(sum(v * x[k] for k, v in row.items()) - b))
    for k, xk in enumerate(x):
        lo, hi = lp.lower[k], lp.upper[k]
        if lo is not None:
            worst = max(worst, lo - xk)
        if hi is not None:
            worst = max(worst, xk - hi)
    return worst


def _float_residual(lp: LinearProgram, x: np.ndarray) -> float:
    worst = 0.0
    if lp.rows:
        gap = _matrix(lp.rows, lp.num_vars) @ x - np.asarray([float(b) for b in lp.rhs])
        worst = max(worst, float(gap.max()))
    if lp.eq_rows:
        gap = _matrix(lp.eq_rows, lp.num_vars) @ x - np.asarray([float(b) for b in lp.eq_rhs])
        worst = max(worst, float(np.abs(gap).max()))
    for k, xk in enumerate(x):
        lo, hi = lp.lower[k], lp.upper[k]
        if lo is not None:
            worst = max(worst, float(lo) - float(xk))
        if hi is not None:
            worst = max(worst, float(xk) - float(hi))
    return worst


def _objective_value(lp: LinearProgram, x: list[Number] | tuple[Number, ...]) -> Number:
    value = sum((c * xk for c, xk in zip(lp.objective, x, strict=True) if c != 0), Fraction(0))
    if any(isinstance(v, float) for v in x):
        return float(value)
    return value


# =============================================================================
# Exact simplex (rational mode, b >= 0)
# =============================================================================


def _standard_form(lp: LinearProgram):
    """Columns y >= 0 with x_k = y_k+ (- y_k-) and upper bounds turned into rows."""
    cols: list[tuple[int, int]] = []  # (var, sign)
    for k in range(lp.num_vars):
        if lp.lower[k] not in (None, 0):
            raise ValidationError("Exact simplex supports lower bounds 0 or free", {"var": lp.var_names[k]})
        cols.append((k, 1))
        if lp.lower[k] is None:
            cols.append((k, -1))
    col_of: dict[int, list[tuple[int, int]]] = {}
    for c, (k, sign) in enumerate(cols):
        col_of.setdefault(k, []).append((c, sign))

    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    for row, b in zip(lp.rows, lp.rhs, strict=True):
        r: dict[int, Fraction] = {}
        for k, v in row.items():
            for c, sign in col_of[k]:
                r[c] = sign * v
        rows.append(r)
        rhs.append(b)
    for k, hi in enumerate(lp.upper):
        if hi is not None:
            rows.append({c: Fraction(sign) for c, sign in col_of[k]})
            rhs.append(hi)
    cost = [sign * lp.objective[k] for k, sign in cols]
    return cols, rows, rhs, cost


def _solve_exact_simplex(lp: LinearProgram) -> LpSolution:
    cols, rows_sparse, b, d = _standard_form(lp)
    n = len(cols)
    m = len(rows_sparse)
    # dense tableau rows over the nonbasic columns
    T = [[r.get(j, Fraction(0)) for j in range(n)] for r in rows_sparse]
    b = list(b)
    d = list(d)
    z = Fraction(0)
    basic = list(range(n, n + m))
    nonbasic = list(range(n))

    max_iter = 50 * (n + m) + 1000
    degenerate_run = 0
    bland = False
    iterations = 0
    while True:
        if iterations >= max_iter:
            raise SolverError("Exact simplex iteration limit", {"lp": lp.name, "iterations": iterations})
        entering = -1
        if bland:
            best_id = None
            for j in range(n):
                if d[j] > 0 and (best_id is None or nonbasic[j] < best_id):
                    best_id, entering = nonbasic[j], j
        else:
            best_d = Fraction(0)
            for j in range(n):
                if d[j] > best_d or (d[j] == best_d and d[j] > 0 and nonbasic[j] < nonbasic[entering]):
                    best_d, entering = d[j], j
        if entering < 0:
            break

        leaving = -1
        best_key: tuple[Fraction, int] | None = None
        for i in range(m):
            a = T[i][entering]
            if a > 0:
                key = (b[i] / a, basic[i])
                if best_key is None or key < best_key:
                    best_key, leaving = key, i
        if leaving < 0:
            raise SolverError("LP is unbounded", {"lp": lp.name, "column": entering})

        degenerate_run = degenerate_run + 1 if best_key[0] == 0 else 0
        if degenerate_run > _BLAND_AFTER:
            bland = True

        z += _pivot(T, b, d, leaving, entering)
        basic[leaving], nonbasic[entering] = nonbasic[entering], basic[leaving]
        iterations += 1

    y = [Fraction(0)] * n
    for i, var_id in enumerate(basic):
        if var_id < n:
            y[var_id] = b[i]
    x = [Fraction(0)] * lp.num_vars
    for c, (k, sign) in enumerate(cols):
        x[k] += sign * y[c]

    res = residual(lp, x)
    if res != 0:
        raise SolverError("Exact simplex produced an infeasible point", {"lp": lp.name, "residual": float(res)})
    objective = _objective_value(lp, x)
    if objective != z:
        raise SolverError("Exact simplex objective mismatch", {"lp": lp.name})
    return LpSolution(
        objective=objective,
        values=tuple(x),
        status=STATUS_OPTIMAL,
        backend=BACKEND_EXACT,
        residual=0.0,
        iterations=iterations,
        var_index=dict(lp._index),
    )


def _pivot(T: list[list[Fraction]], b: list[Fraction], d: list[Fraction], r: int, s: int) -> Fraction:
    """Exchange basic row r with nonbasic column s; returns the objective increase."""
    a = T[r][s]
    row = T[r]
    new_row = [v / a for v in row]
    new_row[s] = 1 / a
    new_b = b[r] / a
    for i, other in enumerate(T):
        if i == r:
            continue
        f = other[s]
        if f == 0:
            continue
        for j, v in enumerate(new_row):
            if j == s:
                other[j] = -f * v
            elif v != 0:
                other[j] -= f * v
        b[i] -= f * new_b
    f = d[s]
    if f != 0:
        for j, v in enumerate(new_row):
            if j == s:
                d[j] = -f * v
            elif v != 0:
                d[j] -= f * v
    T[r] = new_row
    b[r] = new_b
    return f * new_b


# =============================================================================
# HiGHS
# =============================================================================


def _matrix(rows: list[dict[int, Number]], n: int) -> sparse.csr_matrix:
    data: list[float] = []
    ri: list[int] = []
    ci: list[int] = []
    for i, row in enumerate(rows):
        for k, v in row.items():
            ri.append(i)
            ci.append(k)
            data.append(float(v))
    return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))


def _solve_highs(lp: LinearProgram, vertex: bool):
    n = lp.num_vars
    c = -np.asarray([float(v) for v in lp.objective], dtype=float)
    kwargs: dict[str, Any] = {}
    if lp.rows:
        kwargs["A_ub"] = _matrix(lp.rows, n)
        kwargs["b_ub"] = np.asarray([float(v) for v in lp.rhs], dtype=float)
    if lp.eq_rows:
        kwargs["A_eq"] = _matrix(lp.eq_rows, n)
        kwargs["b_eq"] = np.asarray([float(v) for v in lp.eq_rhs], dtype=float)
    bounds = [
        (None if lo is None else float(lo), None if hi is None else float(hi))
        for lo, hi in zip(lp.lower, lp.upper, strict=True)
    ]
    res = linprog(
        c,
        bounds=bounds,
        method="highs-ds" if vertex else "highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
        **kwargs,
    )
    if res.status != 0:
        raise SolverError(
            "HiGHS did not reach an optimum",
            {"lp": lp.name, "status": int(res.status), "message": str(res.message)[:200]},
        )
    return res


# =============================================================================
# Exact vertex recovery
# =============================================================================


def _solve_square(rows: list[dict[int, Fraction]], rhs: list[Fraction], n: int) -> list[Fraction] | None:
    """Sparse Fraction elimination; None when the system is singular or inconsistent."""
    pivots: dict[int, tuple[dict[int, Fraction], Fraction]] = {}
    order: dict[int, int] = {}
    for row, h in zip(rows, rhs, strict=True):
        r = dict(row)
        while True:
            hit = [c for c in r if c in pivots]
            if not hit:
                break
            c = min(hit, key=order.__getitem__)
            f = r.pop(c)
            prow, ph = pivots[c]
            for k, v in prow.items():
                if k == c:
                    continue
                nv = r.get(k, Fraction(0)) - f * v
                if nv == 0:
                    r.pop(k, None)
                else:
                    r[k] = nv
            h -= f * ph
        if not r:
            return None
        c = min(r)
        a = r[c]
        pivots[c] = ({k: v / a for k, v in r.items()}, h / a)
        order[c] = len(order)
    if len(pivots) < n:
        return None
    x: dict[int, Fraction] = {}
    for c in sorted(order, key=order.__getitem__, reverse=True):
        prow, ph = pivots[c]
        x[c] = ph - sum((v * x[k] for k, v in prow.items() if k != c), start=Fraction(0))
    return [x[k] for k in range(n)]


def _constraints(lp: LinearProgram):
    """All constraints as (coeffs, rhs, is_eq): rows, equalities, then bounds."""
    out: list[tuple[dict[int, Fraction], Fraction, bool]] = []
    out.extend((row, b, False) for row, b in zip(lp.rows, lp.rhs, strict=True))
    out.extend((row, b, True) for row, b in zip(lp.eq_rows, lp.eq_rhs, strict=True))
    for k in range(lp.num_vars):
        if lp.lower[k] is not None:
            out.append(({k: Fraction(-1)}, -lp.lower[k], False))
        if lp.upper[k] is not None:
            out.append(({k: Fraction(1)}, lp.upper[k], False))
    return out


def _crossover(lp: LinearProgram, x_float: np.ndarray, objective_float: float) -> LpSolution | None:
    n = lp.num_vars
    if n == 0 or n > get_settings().lp_crossover_max_vars:
        return None
    cons = _constraints(lp)
    active = []
    for idx, (row, b, is_eq) in enumerate(cons):
        lhs = sum(float(v) * x_float[k] for k, v in row.items())
        if is_eq or float(b) - lhs <= _ACTIVE_TOL * (1.0 + abs(float(b))):
            active.append(idx)
    if len(active) < n:
        return None

    G = np.zeros((len(active), n), dtype=float)
    for a, idx in enumerate(active):
        for k, v in cons[idx][0].items():
            G[a, k] = float(v)
    _, R, perm = scipy.linalg.qr(G.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size < n or diag[0] == 0 or diag[n - 1] <= 1e-9 * diag[0]:
        return None
    basis = [active[p] for p in perm[:n]]

    x = _solve_square([cons[i][0] for i in basis], [cons[i][1] for i in basis], n)
    if x is None or residual(lp, x) != 0:
        return None

    objective = _objective_value(lp, x)
    # duals: G_B^T y = c
    t_rows: list[dict[int, Fraction]] = [{} for _ in range(n)]
    for a, idx in enumerate(basis):
        for k, v in cons[idx][0].items():
            t_rows[k][a] = v
    y = _solve_square(t_rows, list(lp.objective), n)
    certified = y is not None and all(
        y[a] >= 0 for a, idx in enumerate(basis) if not cons[idx][2]
    )
    if not certified:
        scale = max(1.0, abs(objective_float))
        if float(objective) < objective_float - get_settings().float_tolerance * scale:
            return None
    return LpSolution(
        objective=objective,
        values=tuple(x),
        status=STATUS_OPTIMAL if certified else STATUS_VERTEX,
        backend=BACKEND_CROSSOVER,
        residual=0.0,
        iterations=0,
        var_index=dict(lp._index),
    )


# =============================================================================
# Entry point
# =============================================================================


def _exact_eligible(lp: LinearProgram) -> bool:
    return (
        not lp.eq_rows
        and all(b >= 0 for b in lp.rhs)
        and all(lo is None or lo == 0 for lo in lp.lower)
        and all(hi is None or hi >= 0 for hi in lp.upper)
        and lp.cells <= get_settings().lp_exact_max_cells
    )


def solve(lp: LinearProgram, mode: NumericMode | str | None = None) -> LpSolution:
    """Maximize lp. Rational mode prefers exact answers; float mode always uses HiGHS."""
    mode = resolve_mode(mode if mode is not None else lp.mode)
    s = get_settings()
    if lp.num_rows > s.lp_max_rows:
        raise CapacityError("LP row cap exceeded", {"lp": lp.name, "rows": lp.num_rows, "cap": s.lp_max_rows})

    if is_rational(mode) and _exact_eligible(lp):
        sol = _solve_exact_simplex(lp)
    else:
        try:
            res = _solve_highs(lp, vertex=is_rational(mode))
        except SolverError:
            LP_SOLVES_TOTAL.labels(backend=BACKEND_HIGHS, status="failed").inc()
            raise
        x = np.asarray(res.x, dtype=float)
        obj = -float(res.fun)
        scale = max(1.0, float(np.max(np.abs(x))) if x.size else 0.0, *(abs(float(b)) for b in lp.rhs))
        res_float = _float_residual(lp, x)
        if res_float > s.float_tolerance * scale:
            LP_SOLVES_TOTAL.labels(backend=BACKEND_HIGHS, status="residual").inc()
            raise SolverError(
                "HiGHS solution violates constraints", {"lp": lp.name, "residual": res_float, "scale": scale}
            )
        sol = None
        if is_rational(mode):
            sol = _crossover(lp, x, obj)
            if sol is None:
                values = [rationalize(float(v)) for v in x]
                sol = LpSolution(
                    objective=_objective_value(lp, values),
                    values=tuple(values),
                    status=STATUS_RATIONALIZED,
                    backend=BACKEND_HIGHS,
                    residual=float(residual(lp, values)),
                    iterations=int(getattr(res, "nit", 0) or 0),
                    var_index=dict(lp._index),
                )
        if sol is None:
            sol = LpSolution(
                objective=obj,
                values=tuple(float(v) for v in x),
                status=STATUS_OPTIMAL,
                backend=BACKEND_HIGHS,
                residual=res_float,
                iterations=int(getattr(res, "nit", 0) or 0),
                var_index=dict(lp._index),
            )

    LP_SOLVES_TOTAL.labels(backend=sol.backend, status=sol.status).inc()
    log.info(
        "lp_solved",
        extra={
            "payload": {
                "lp": lp.name,
                "vars": lp.num_vars,
                "rows": lp.num_rows,
                "backend": sol.backend,
                "status": sol.status,
                "objective": float(sol.objective),
                "residual": sol.residual,
                "iterations": sol.iterations,
            }
        },
    )
    return sol


# =============================================================================
# LP text
# =============================================================================


def _fmt(v: Number) -> str:
    f = float(v)
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    return repr(f)


def _expr(row: Mapping[int, Number], names: list[str]) -> str:
    if not row:
        return "0 " + names[0] if names else "0"
    parts = []
    for k in sorted(row):
        v = float(row[k])
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {abs(v)!r} {names[k]}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def to_lp_format(lp: LinearProgram) -> str:
    """CPLEX LP text (coefficients printed as floats)."""
    names = [n.replace(" ", "_") for n in lp.var_names]
    obj = {k: v for k, v in enumerate(lp.objective) if v != 0}
    lines = [f"\\ {lp.name}", "Maximize", f" obj: {_expr(obj, names)}", "Subject To"]
    for name, row, b in zip(lp.row_names, lp.rows, lp.rhs, strict=True):
        lines.append(f" {name}: {_expr(row, names)} <= {_fmt(b)}")
    for name, row, b in zip(lp.eq_names, lp.eq_rows, lp.eq_rhs, strict=True):
        lines.append(f" {name}: {_expr(row, names)} = {_fmt(b)}")
    lines.append("Bounds")
    for k, name in enumerate(names):
        lo, hi = lp.lower[k], lp.upper[k]
        if lo is None and hi is None:
            lines.append(f" {name} free")
        elif lo is None:
            lines.append(f" -inf <= {name} <= {_fmt(hi)}")
        elif hi is None:
            if lo != 0:
                lines.append(f" {name} >= {_fmt(lo)}")
        else:
            lines.append(f" {_fmt(lo)} <= {name} <= {_fmt(hi)}")
    lines.append("End")
    return "\n".join(lines) + "\n"
