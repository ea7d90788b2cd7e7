"""Bounded-integer linear programs: model, branch-and-bound, oracle, LP export.

The branch-and-bound solver uses LP relaxations (HiGHS through
``scipy.optimize.linprog``) for bounds, explores depth first, branches on
the lowest-index fractional variable and tries the down (0) branch first.
``brute_force`` is an independent exhaustive oracle that never solves an LP.
"""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

INT_TOL = 1e-6
FEAS_TOL = 1e-9
OBJ_RTOL = 1e-9

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


class ModelError(ValueError):
    pass


class OracleLimitError(RuntimeError):
    """Exhaustive enumeration would visit more nodes than allowed."""


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = 1.0
    integer: bool = True

    @property
    def binary(self) -> bool:
        return self.integer and self.lb == 0 and self.ub == 1


@dataclass(frozen=True)
class Constraint:
    terms: tuple[tuple[int, float], ...]
    sense: str          # "<=", "=", ">="
    rhs: float
    name: str

    def activity(self, x) -> float:
        return sum(a * x[i] for i, a in self.terms)

    def violation(self, x) -> float:
        act = self.activity(x)
        if self.sense == "<=":
            return max(0.0, act - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - act)
        return abs(act - self.rhs)


class IlpModel:
    """Minimisation model over finite-bounded integer variables."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self._index: dict[str, int] = {}

    def __len__(self):
        return len(self.variables)

    def add_var(self, name: str, lb: float = 0, ub: float = 1, integer: bool = True) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable name {name!r}")
        if not _NAME_RE.match(name):
            raise ModelError(f"variable name {name!r} is not LP-safe")
        if not (math.isfinite(lb) and math.isfinite(ub)) or lb > ub:
            raise ModelError(f"bad bounds [{lb}, {ub}] for {name}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, lb, ub, integer))
        return len(self.variables) - 1

    def index(self, name: str) -> int:
        return self._index[name]

    def add_constraint(self, terms: Mapping[int, float] | Iterable[tuple[int, float]],
                       sense: str, rhs: float, name: str | None = None) -> int:
        if sense not in ("<=", "=", ">="):
            raise ModelError(f"unknown sense {sense!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[int, float] = {}
        for i, a in items:
            if not 0 <= i < len(self.variables):
                raise ModelError(f"constraint references undeclared variable {i}")
            merged[i] = merged.get(i, 0.0) + float(a)
        name = name or f"c{len(self.constraints)}"
        if not _NAME_RE.match(name):
            raise ModelError(f"constraint name {name!r} is not LP-safe")
        row = tuple((i, a) for i, a in sorted(merged.items()) if a != 0.0)
        self.constraints.append(Constraint(row, sense, float(rhs), name))
        return len(self.constraints) - 1

    def set_objective(self, terms: Mapping[int, float]) -> None:
        for i in terms:
            if not 0 <= i < len(self.variables):
                raise ModelError(f"objective references undeclared variable {i}")
        self.objective = {i: float(a) for i, a in sorted(terms.items()) if a != 0.0}

    def add_objective(self, i: int, coef: float) -> None:
        self.objective[i] = self.objective.get(i, 0.0) + float(coef)

    def evaluate(self, x) -> float:
        return sum(a * x[i] for i, a in sorted(self.objective.items()))

    def max_violation(self, x) -> float:
        worst = max((c.violation(x) for c in self.constraints), default=0.0)
        for v, xi in zip(self.variables, x):
            worst = max(worst, v.lb - xi, xi - v.ub)
        return worst

    def is_feasible(self, x, tol: float = FEAS_TOL) -> bool:
        for c in self.constraints:
            if c.violation(x) > tol * max(1.0, abs(c.rhs)):
                return False
        return all(v.lb - tol <= xi <= v.ub + tol for v, xi in zip(self.variables, x))

    def domain_size(self) -> float:
        return math.prod(v.ub - v.lb + 1 for v in self.variables)


@dataclass
class SolveResult:
    status: str                    # "optimal" | "infeasible" | "timeout"
    values: list | None
    objective: float | None
    bound: float = -math.inf       # proven lower bound on the optimum
    root_bound: float = -math.inf
    nodes: int = 0
    elapsed: float = 0.0
    names: list[str] = field(default_factory=list)

    def value(self, name: str):
        return self.values[self.names.index(name)]

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values or []))


def _arrays(m: IlpModel):
    n = len(m.variables)
    c = np.zeros(n)
    for i, a in m.objective.items():
        c[i] = a
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for con in m.constraints:
        if con.sense == "=":
            eq_rows.append(con.terms)
            eq_rhs.append(con.rhs)
        elif con.sense == "<=":
            ub_rows.append(con.terms)
            ub_rhs.append(con.rhs)
        else:
            ub_rows.append(tuple((i, -a) for i, a in con.terms))
            ub_rhs.append(-con.rhs)

    def mat(rows):
        if not rows:
            return None
        data, ri, ci = [], [], []
        for r, row in enumerate(rows):
            for i, a in row:
                ri.append(r)
                ci.append(i)
                data.append(a)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

    lb = np.array([v.lb for v in m.variables], dtype=float)
    ub = np.array([v.ub for v in m.variables], dtype=float)
    return c, mat(ub_rows), np.array(ub_rhs), mat(eq_rows), np.array(eq_rhs), lb, ub


def _worse_or_equal(bound: float, incumbent: float) -> bool:
    return bound >= incumbent - OBJ_RTOL * max(1.0, abs(incumbent))


def solve(m: IlpModel, time_limit: float | None = None) -> SolveResult:
    """Exact minimisation by LP-based branch and bound."""
    t0 = time.perf_counter()
    names = [v.name for v in m.variables]
    n = len(m.variables)
    for con in m.constraints:
        if not con.terms and con.violation([0.0] * n) > FEAS_TOL:
            return SolveResult("infeasible", None, None, math.inf, math.inf, 0,
                               time.perf_counter() - t0, names)
    if n == 0:
        return SolveResult("optimal", [], 0.0, 0.0, 0.0, 0, 0.0, names)

    c, A_ub, b_ub, A_eq, b_eq, lb0, ub0 = _arrays(m)
    is_int = np.array([v.integer for v in m.variables])

    def relax(lb, ub):
        res = linprog(c, A_ub=A_ub, b_ub=b_ub if A_ub is not None else None,
                      A_eq=A_eq, b_eq=b_eq if A_eq is not None else None,
                      bounds=np.column_stack([lb, ub]), method="highs")
        if res.status == 2:
            return None
        if res.status != 0:
            raise RuntimeError(f"LP relaxation failed: {res.message}")
        return res.x, float(res.fun)

    best_x, best_obj = None, math.inf
    root_bound = None
    nodes = 0
    stack = [(lb0, ub0, -math.inf)]
    timed_out = False
    while stack:
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            timed_out = True
            break
        lb, ub, parent_bound = stack.pop()
        if best_x is not None and _worse_or_equal(parent_bound, best_obj):
            continue
        nodes += 1
        sol = relax(lb, ub)
        if sol is None:
            if root_bound is None:
                root_bound = math.inf
            continue
        x, bound = sol
        if root_bound is None:
            root_bound = bound
        if best_x is not None and _worse_or_equal(bound, best_obj):
            continue
        frac = np.abs(x - np.round(x))
        branch_on = next((i for i in range(n) if is_int[i] and frac[i] > INT_TOL), None)
        if branch_on is None:
            xr = [int(round(xi)) if is_int[i] else float(xi) for i, xi in enumerate(x)]
            if m.is_feasible(xr):
                obj = m.evaluate(xr)
                if best_x is None or obj < best_obj - OBJ_RTOL * max(1.0, abs(best_obj)):
                    best_x, best_obj = xr, obj
                continue
            # rounding broke feasibility: branch on the least integral variable
            cand = [i for i in range(n) if is_int[i] and frac[i] > 0]
            if not cand:
                continue
            branch_on = max(cand, key=lambda i: (frac[i], -i))
        v = x[branch_on]
        down_ub = ub.copy()
        down_ub[branch_on] = math.floor(v)
        up_lb = lb.copy()
        up_lb[branch_on] = math.ceil(v) if math.ceil(v) > math.floor(v) else math.floor(v) + 1
        if up_lb[branch_on] <= ub[branch_on]:
            stack.append((up_lb, ub, bound))
        if down_ub[branch_on] >= lb[branch_on]:
            stack.append((lb, down_ub, bound))

    elapsed = time.perf_counter() - t0
    if root_bound is None:
        root_bound = -math.inf
    values = best_x
    if timed_out:
        open_bound = min((b for _, _, b in stack), default=math.inf)
        return SolveResult("timeout", values, best_obj if values is not None else None,
                           min(open_bound, best_obj), root_bound, nodes, elapsed, names)
    if best_x is None:
        return SolveResult("infeasible", None, None, math.inf, root_bound, nodes, elapsed, names)
    return SolveResult("optimal", values, best_obj, best_obj, root_bound, nodes, elapsed, names)


def brute_force(m: IlpModel, node_limit: int = 2 ** 24) -> SolveResult:
    """Exhaustive enumeration of integer points, variables in index order.

    Each variable's candidate values are cut down to those that keep every
    row satisfiable given the bounds of the still-free variables, so only
    consistent partial assignments are expanded. No objective pruning is
    done. Raises OracleLimitError past ``node_limit`` visited nodes.
    """
    t0 = time.perf_counter()
    names = [v.name for v in m.variables]
    n = len(m.variables)
    for v in m.variables:
        if not v.integer:
            raise ModelError("brute_force needs integer variables only")
    lo_r, hi_r = [], []
    for con in m.constraints:
        lo_r.append(con.rhs if con.sense in (">=", "=") else -math.inf)
        hi_r.append(con.rhs if con.sense in ("<=", "=") else math.inf)
    var_cons: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for k, con in enumerate(m.constraints):
        for i, a in con.terms:
            var_cons[i].append((k, a))
    lbs = [int(math.ceil(v.lb - FEAS_TOL)) for v in m.variables]
    ubs = [int(math.floor(v.ub + FEAS_TOL)) for v in m.variables]

    def span(a, i):
        x, y = a * lbs[i], a * ubs[i]
        return (x, y) if x <= y else (y, x)

    fixed = [0.0] * len(m.constraints)
    rmin = [0.0] * len(m.constraints)
    rmax = [0.0] * len(m.constraints)
    for i in range(n):
        for k, a in var_cons[i]:
            s0, s1 = span(a, i)
            rmin[k] += s0
            rmax[k] += s1
    for k, con in enumerate(m.constraints):
        tol = FEAS_TOL * max(1.0, abs(con.rhs))
        if rmin[k] > hi_r[k] + tol or rmax[k] < lo_r[k] - tol:
            return SolveResult("infeasible", None, None, math.inf, math.inf, 0,
                               time.perf_counter() - t0, names)

    x = [0] * n
    best = {"x": None, "obj": math.inf}
    count = [0]

    def candidates(i):
        lo, hi = lbs[i], ubs[i]
        for k, a in var_cons[i]:
            s0, s1 = span(a, i)
            others_min = rmin[k] - s0
            others_max = rmax[k] - s1
            tol = FEAS_TOL * max(1.0, abs(m.constraints[k].rhs))
            upper = hi_r[k] - fixed[k] - others_min + tol     # a*x <= upper
            lower = lo_r[k] - fixed[k] - others_max - tol     # a*x >= lower
            if a > 0:
                if upper < math.inf:
                    hi = min(hi, math.floor(upper / a))
                if lower > -math.inf:
                    lo = max(lo, math.ceil(lower / a))
            else:
                if upper < math.inf:
                    lo = max(lo, math.ceil(upper / a))
                if lower > -math.inf:
                    hi = min(hi, math.floor(lower / a))
            if lo > hi:
                break
        return range(lo, hi + 1)

    def visit(i):
        count[0] += 1
        if count[0] > node_limit:
            raise OracleLimitError(f"brute force exceeded {node_limit} nodes")
        if i == n:
            if m.is_feasible(x):
                obj = m.evaluate(x)
                if best["x"] is None or obj < best["obj"] - OBJ_RTOL * max(1.0, abs(best["obj"])):
                    best["x"], best["obj"] = list(x), obj
            return
        cons = var_cons[i]
        spans = [span(a, i) for _, a in cons]
        for val in candidates(i):
            x[i] = val
            for (k, a), (s0, s1) in zip(cons, spans):
                fixed[k] += a * val
                rmin[k] -= s0
                rmax[k] -= s1
            visit(i + 1)
            for (k, a), (s0, s1) in zip(cons, spans):
                fixed[k] -= a * val
                rmin[k] += s0
                rmax[k] += s1
        x[i] = 0

    visit(0)
    elapsed = time.perf_counter() - t0
    if best["x"] is None:
        return SolveResult("infeasible", None, None, math.inf, math.inf, count[0], elapsed, names)
    return SolveResult("optimal", best["x"], best["obj"], best["obj"], best["obj"],
                       count[0], elapsed, names)


def _fmt(a: float) -> str:
    if a == int(a) and abs(a) < 1e15:
        return str(int(a))
    return repr(a)


def _expr(terms, names) -> list[str]:
    parts = []
    for k, (i, a) in enumerate(terms):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        coef = "" if mag == 1 else _fmt(mag) + " "
        if k == 0:
            parts.append(("-" if a < 0 else "") + coef + names[i])
        else:
            parts.append(f"{sign} {coef}{names[i]}")
    return parts


def _wrap(head: str, parts: list[str], tail: str = "", per_line: int = 6) -> list[str]:
    lines = []
    for k in range(0, max(len(parts), 1), per_line):
        chunk = " ".join(parts[k:k + per_line])
        lines.append((head if k == 0 else "    ") + chunk)
    lines[-1] += tail
    return lines


def export_lp(m: IlpModel) -> str:
    """CPLEX LP-format text for the model."""
    names = [v.name for v in m.variables]
    out = [f"\\ {m.name}", "Minimize"]
    obj = sorted(m.objective.items())
    if obj:
        parts = _expr(obj, names)
    else:
        parts = [f"0 {names[0]}"] if names else []
    out += _wrap(" obj: ", parts)
    out.append("Subject To")
    for con in m.constraints:
        sense = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        parts = _expr(con.terms, names) if con.terms else [f"0 {names[0]}"]
        out += _wrap(f" {con.name}: ", parts, f" {sense} {_fmt(con.rhs)}")
    out.append("Bounds")
    binaries, generals = [], []
    for v in m.variables:
        if v.binary:
            binaries.append(v.name)
            continue
        out.append(f" {_fmt(v.lb)} <= {v.name} <= {_fmt(v.ub)}")
        if v.integer:
            generals.append(v.name)
    if binaries:
        out.append("Binaries")
        out += [" " + " ".join(binaries[k:k + 8]) for k in range(0, len(binaries), 8)]
    if generals:
        out.append("Generals")
        out += [" " + " ".join(generals[k:k + 8]) for k in range(0, len(generals), 8)]
    out.append("End")
    return "\n".join(out) + "\n"
