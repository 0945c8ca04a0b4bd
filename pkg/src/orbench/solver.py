"""Exact desk-scale LP/MILP solving: primal simplex with Bland's rule plus branch-and-bound.

Used to verify stored benchmark optima and to generate expected values for
fixtures.  Sized for small hand-written models, not production workloads.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

FEASIBILITY_TOL = 1e-9
INTEGRALITY_TOL = 1e-6
MAX_LP_DIM = 200
MAX_INTEGER_VARS = 40
_NODE_LIMIT = 100_000


class Sense(str, Enum):
    MAXIMIZE = "max"
    MINIMIZE = "min"


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class VarKind(str, Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    BINARY = "binary"


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class DimensionMismatch(ValueError):
    """Model arrays disagree in length, or the model exceeds desk scale."""


@dataclass(frozen=True)
class Row:
    coeffs: tuple[float, ...]
    relation: Relation
    rhs: float


@dataclass
class LinearProgram:
    """Dense statement of min/max c.x subject to relation rows and variable bounds."""

    sense: Sense
    objective: list[float]
    rows: list[Row] = field(default_factory=list)
    bounds: list[tuple[float, float]] | None = None
    integrality: list[VarKind] | None = None

    def __post_init__(self) -> None:
        n = len(self.objective)
        if self.bounds is None:
            self.bounds = [(0.0, math.inf)] * n
        if self.integrality is None:
            self.integrality = [VarKind.CONTINUOUS] * n
        if len(self.bounds) != n or len(self.integrality) != n:
            raise DimensionMismatch(
                f"objective has {n} variables, bounds {len(self.bounds)}, "
                f"integrality {len(self.integrality)}"
            )
        for i, row in enumerate(self.rows):
            if len(row.coeffs) != n:
                raise DimensionMismatch(f"row {i} has {len(row.coeffs)} coefficients, expected {n}")
        fixed = []
        for j, ((lo, hi), kind) in enumerate(zip(self.bounds, self.integrality)):
            if kind == VarKind.BINARY:
                lo, hi = max(lo, 0.0), min(hi, 1.0)
            if lo > hi:
                raise DimensionMismatch(f"variable {j} has lower bound {lo} > upper bound {hi}")
            fixed.append((lo, hi))
        self.bounds = fixed

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def integer_indices(self) -> list[int]:
        return [j for j, kind in enumerate(self.integrality) if kind != VarKind.CONTINUOUS]


@dataclass(frozen=True)
class Solution:
    status: SolveStatus
    objective: float | None = None
    assignment: tuple[float, ...] = ()


def row_le(coeffs, rhs) -> Row:
    return Row(tuple(float(c) for c in coeffs), Relation.LE, float(rhs))


def row_ge(coeffs, rhs) -> Row:
    return Row(tuple(float(c) for c in coeffs), Relation.GE, float(rhs))


def row_eq(coeffs, rhs) -> Row:
    return Row(tuple(float(c) for c in coeffs), Relation.EQ, float(rhs))


# --- variable mapping to the all-nonnegative standard form ---------------------------------

_SHIFT = "shift"  # x = lo + y
_MIRROR = "mirror"  # x = hi - y
_SPLIT = "split"  # x = y_pos - y_neg


def _map_variables(lp: LinearProgram, bounds: list[tuple[float, float]]):
    """Return (specs, extra_rows, num_mapped) turning arbitrary bounds into y >= 0."""
    specs = []
    extra_rows: list[Row] = []
    col = 0
    for j, (lo, hi) in enumerate(bounds):
        if lo == -math.inf and hi == math.inf:
            specs.append((_SPLIT, col, col + 1, 0.0))
            col += 2
        elif lo == -math.inf:
            specs.append((_MIRROR, col, None, hi))
            col += 1
        else:
            specs.append((_SHIFT, col, None, lo))
            if hi != math.inf:
                unit = [0.0] * lp.num_vars
                unit[j] = 1.0
                extra_rows.append(Row(tuple(unit), Relation.LE, hi))
            col += 1
    return specs, extra_rows, col


def _mapped_row(coeffs, rhs, specs, width):
    out = np.zeros(width)
    shift = 0.0
    for j, a in enumerate(coeffs):
        if a == 0.0:
            continue
        kind, c1, c2, off = specs[j]
        if kind == _SPLIT:
            out[c1] += a
            out[c2] -= a
        elif kind == _MIRROR:
            out[c1] -= a
            shift += a * off
        else:
            out[c1] += a
            shift += a * off
    return out, rhs - shift


def _recover(y: np.ndarray, specs) -> tuple[float, ...]:
    xs = []
    for kind, c1, c2, off in specs:
        if kind == _SPLIT:
            xs.append(y[c1] - y[c2])
        elif kind == _MIRROR:
            xs.append(off - y[c1])
        else:
            xs.append(off + y[c1])
    return tuple(float(v) for v in xs)


# --- tableau simplex ------------------------------------------------------------------------


def _pivot(tab: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for r in range(tab.shape[0]):
        if r != row and abs(tab[r, col]) > 1e-14:
            tab[r] -= tab[r, col] * tab[row]
    basis[row] = col


def _run_simplex(tab: np.ndarray, basis: list[int], banned: set[int]) -> str:
    """Minimize over the tableau in place using Bland's anti-cycling rule."""
    m = tab.shape[0] - 1
    ncols = tab.shape[1] - 1
    while True:
        enter = -1
        for j in range(ncols):
            if j not in banned and tab[-1, j] < -FEASIBILITY_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave, best_ratio, best_basis = -1, math.inf, math.inf
        for i in range(m):
            a = tab[i, enter]
            if a > FEASIBILITY_TOL:
                ratio = tab[i, -1] / a
                if ratio < best_ratio - FEASIBILITY_TOL or (
                    abs(ratio - best_ratio) <= FEASIBILITY_TOL and basis[i] < best_basis
                ):
                    leave, best_ratio, best_basis = i, ratio, basis[i]
        if leave < 0:
            return "unbounded"
        _pivot(tab, basis, leave, enter)


def _solve_standardized(lp: LinearProgram, bounds: list[tuple[float, float]]) -> Solution:
    specs, extra_rows, width = _map_variables(lp, bounds)
    rows = list(lp.rows) + extra_rows

    mapped = []
    for row in rows:
        coeffs, rhs = _mapped_row(row.coeffs, row.rhs, specs, width)
        rel = row.relation
        if rhs < 0:
            coeffs, rhs = -coeffs, -rhs
            rel = {Relation.LE: Relation.GE, Relation.GE: Relation.LE, Relation.EQ: Relation.EQ}[rel]
        mapped.append((coeffs, rel, rhs))

    m = len(mapped)
    num_slack = sum(1 for _, rel, _ in mapped if rel != Relation.EQ)
    total = width + num_slack + m  # structural + slack/surplus + artificial
    tab = np.zeros((m + 1, total + 1))
    basis: list[int] = []
    slack_at = width
    for i, (coeffs, rel, rhs) in enumerate(mapped):
        tab[i, :width] = coeffs
        if rel == Relation.LE:
            tab[i, slack_at] = 1.0
            slack_at += 1
        elif rel == Relation.GE:
            tab[i, slack_at] = -1.0
            slack_at += 1
        art = width + num_slack + i
        tab[i, art] = 1.0
        tab[i, -1] = rhs
        basis.append(art)

    # phase 1: reduced costs of minimizing the artificial sum
    tab[-1, :] = -tab[:m, :].sum(axis=0)
    tab[-1, width + num_slack : width + num_slack + m] = 0.0

    artificial = set(range(width + num_slack, width + num_slack + m))
    if _run_simplex(tab, basis, banned=set()) != "optimal" or -tab[-1, -1] > 1e-7:
        return Solution(SolveStatus.INFEASIBLE)

    # drive residual artificials out of the basis where possible
    for i in range(m):
        if basis[i] in artificial:
            for j in range(width + num_slack):
                if abs(tab[i, j]) > FEASIBILITY_TOL:
                    _pivot(tab, basis, i, j)
                    break

    # phase 2
    c = np.zeros(total)
    obj = np.array(lp.objective, dtype=float)
    if lp.sense == Sense.MAXIMIZE:
        obj = -obj
    for j, a in enumerate(obj):
        if a == 0.0:
            continue
        kind, c1, c2, off = specs[j]
        if kind == _SPLIT:
            c[c1] += a
            c[c2] -= a
        elif kind == _MIRROR:
            c[c1] -= a
        else:
            c[c1] += a
    tab[-1, :] = 0.0
    tab[-1, :total] = c
    for i in range(m):
        if abs(c[basis[i]]) > 0:
            tab[-1] -= c[basis[i]] * tab[i]

    if _run_simplex(tab, basis, banned=artificial) != "optimal":
        return Solution(SolveStatus.UNBOUNDED)

    y = np.zeros(total)
    for i in range(m):
        y[basis[i]] = tab[i, -1]
    assignment = _recover(y, specs)
    objective = float(np.dot(lp.objective, assignment))
    return Solution(SolveStatus.OPTIMAL, objective, assignment)


def solve_lp(lp: LinearProgram) -> Solution:
    """Solve a purely continuous program; integrality markers are rejected."""
    if lp.integer_indices():
        raise DimensionMismatch("model declares integer variables; use solve_milp")
    if lp.num_vars > MAX_LP_DIM or len(lp.rows) > MAX_LP_DIM:
        raise DimensionMismatch(f"model exceeds desk scale ({MAX_LP_DIM} vars/rows)")
    return _solve_standardized(lp, lp.bounds)


def _relaxation(lp: LinearProgram, bounds: list[tuple[float, float]]) -> Solution:
    return _solve_standardized(lp, bounds)


def _is_better(candidate: float, incumbent: float | None, sense: Sense) -> bool:
    if incumbent is None:
        return True
    if sense == Sense.MAXIMIZE:
        return candidate > incumbent + FEASIBILITY_TOL
    return candidate < incumbent - FEASIBILITY_TOL


def _bound_cannot_improve(bound: float, incumbent: float | None, sense: Sense) -> bool:
    if incumbent is None:
        return False
    if sense == Sense.MAXIMIZE:
        return bound <= incumbent + FEASIBILITY_TOL
    return bound >= incumbent - FEASIBILITY_TOL


def _snap(assignment, int_idx) -> tuple[float, ...]:
    xs = list(assignment)
    for j in int_idx:
        xs[j] = float(round(xs[j]))
    return tuple(xs)


def solve_milp(lp: LinearProgram) -> Solution:
    """Branch-and-bound over LP relaxations: best-bound node order, most-fractional branching."""
    int_idx = lp.integer_indices()
    if len(int_idx) > MAX_INTEGER_VARS:
        raise DimensionMismatch(f"model exceeds desk scale ({MAX_INTEGER_VARS} integer vars)")
    if not int_idx:
        return solve_lp(lp)

    root = _relaxation(lp, lp.bounds)
    if root.status == SolveStatus.INFEASIBLE:
        return Solution(SolveStatus.INFEASIBLE)
    if root.status == SolveStatus.UNBOUNDED:
        return Solution(SolveStatus.UNBOUNDED)

    incumbent: Solution | None = None
    heap: list = []
    counter = 0

    def push(bounds, sol: Solution) -> None:
        nonlocal counter
        key = -sol.objective if lp.sense == Sense.MAXIMIZE else sol.objective
        heapq.heappush(heap, (key, counter, bounds, sol))
        counter += 1

    push(lp.bounds, root)
    explored = 0
    while heap:
        explored += 1
        if explored > _NODE_LIMIT:
            raise RuntimeError("branch-and-bound node limit exceeded")
        _, _, bounds, sol = heapq.heappop(heap)
        inc_obj = incumbent.objective if incumbent else None
        if _bound_cannot_improve(sol.objective, inc_obj, lp.sense):
            continue

        fractional = [
            (j, sol.assignment[j])
            for j in int_idx
            if abs(sol.assignment[j] - round(sol.assignment[j])) > INTEGRALITY_TOL
        ]
        if not fractional:
            snapped = _snap(sol.assignment, int_idx)
            objective = float(np.dot(lp.objective, snapped))
            if _is_better(objective, inc_obj, lp.sense):
                incumbent = Solution(SolveStatus.OPTIMAL, objective, snapped)
            continue

        j, value = max(fractional, key=lambda it: min(it[1] - math.floor(it[1]), math.ceil(it[1]) - it[1]))
        for lo, hi in (
            (bounds[j][0], math.floor(value + FEASIBILITY_TOL)),
            (math.ceil(value - FEASIBILITY_TOL), bounds[j][1]),
        ):
            if lo > hi:
                continue
            child = list(bounds)
            child[j] = (float(lo), float(hi))
            child_sol = _relaxation(lp, child)
            if child_sol.status != SolveStatus.OPTIMAL:
                continue
            if _bound_cannot_improve(child_sol.objective, incumbent.objective if incumbent else None, lp.sense):
                continue
            push(child, child_sol)

    return incumbent if incumbent else Solution(SolveStatus.INFEASIBLE)


def solve(lp: LinearProgram) -> Solution:
    """Dispatch to the LP or MILP path based on declared integrality."""
    return solve_milp(lp) if lp.integer_indices() else solve_lp(lp)


# --- ground-truth verification --------------------------------------------------------------


class VerdictKind(str, Enum):
    CONFIRMED = "Confirmed"
    MISMATCH = "Mismatch"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    delta: float | None = None

    def __str__(self) -> str:
        if self.kind == VerdictKind.MISMATCH:
            return f"Mismatch({self.delta:g})"
        return self.kind.value


def verify_ground_truth(instance, model: LinearProgram | None, tolerance: float = 1e-6) -> Verdict:
    """Compare the exact optimum of a hand-encoded model against an instance's stored answer.

    Verification defaults to a tight tolerance without integer rounding; the
    loose grading tolerance would wave through wrong stored answers.
    """
    from orbench import grading

    if model is None:
        return Verdict(VerdictKind.NOT_APPLICABLE)
    solution = solve(model)
    if solution.status == SolveStatus.OPTIMAL:
        predicted = repr(solution.objective)
    else:
        predicted = grading.NO_SOLUTION
    if grading.compare(predicted, instance.ground_truth, tolerance, strict=True):
        return Verdict(VerdictKind.CONFIRMED)
    delta = None
    if solution.status == SolveStatus.OPTIMAL:
        try:
            delta = solution.objective - float(instance.ground_truth)
        except ValueError:
            delta = None
    return Verdict(VerdictKind.MISMATCH, delta)


# --- JSON interchange -----------------------------------------------------------------------


def lp_to_dict(lp: LinearProgram) -> dict:
    return {
        "sense": lp.sense.value,
        "objective": list(lp.objective),
        "rows": [[list(r.coeffs), r.relation.value, r.rhs] for r in lp.rows],
        "bounds": [[lo, "inf" if hi == math.inf else hi] for lo, hi in lp.bounds],
        "integrality": [k.value for k in lp.integrality],
    }


def lp_from_dict(obj: dict) -> LinearProgram:
    def _bound(v):
        if v in ("inf", "+inf", None):
            return math.inf
        if v == "-inf":
            return -math.inf
        return float(v)

    return LinearProgram(
        sense=Sense(obj["sense"]),
        objective=[float(c) for c in obj["objective"]],
        rows=[Row(tuple(float(c) for c in coeffs), Relation(rel), float(rhs)) for coeffs, rel, rhs in obj["rows"]],
        bounds=[(_bound(lo), _bound(hi)) for lo, hi in obj["bounds"]] if obj.get("bounds") else None,
        integrality=[VarKind(k) for k in obj["integrality"]] if obj.get("integrality") else None,
    )


def load_model_dir(path: str | Path) -> dict[str, LinearProgram]:
    """Load hand-encoded verification models, one ``<instance_id>.json`` per file."""
    models = {}
    for file in sorted(Path(path).glob("*.json")):
        models[file.stem] = lp_from_dict(json.loads(file.read_text(encoding="utf-8")))
    return models
