"""Self-contained LP/MILP solving for the shim: dictionary-form simplex plus DFS branch-and-bound.

Pure Python on purpose: scripts run in a minimal child process, so the shim
must not depend on anything outside the standard library.  Sized for the small
models generated scripts build, not for production workloads.
"""

from __future__ import annotations

import math

TOL = 1e-9
INT_TOL = 1e-6
NODE_LIMIT = 50_000

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _pivot(tableau, z_row, basic, nonbasic, row, col):
    """Swap basic[row] and nonbasic[col] and substitute through every expression."""
    coef = tableau[row][col + 1]
    leaving = basic[row]
    entering = nonbasic[col]

    width = len(nonbasic) + 1
    new_row = [0.0] * width
    new_row[0] = -tableau[row][0] / coef
    for k in range(len(nonbasic)):
        new_row[k + 1] = -tableau[row][k + 1] / coef
    new_row[col + 1] = 1.0 / coef

    basic[row] = entering
    nonbasic[col] = leaving
    tableau[row] = new_row

    for r in range(len(tableau)):
        if r == row:
            continue
        factor = tableau[r][col + 1]
        if factor == 0.0:
            continue
        tableau[r][col + 1] = 0.0
        for k in range(width):
            tableau[r][k] += factor * new_row[k]

    factor = z_row[col + 1]
    if factor != 0.0:
        z_row[col + 1] = 0.0
        for k in range(width):
            z_row[k] += factor * new_row[k]


def _run_to_optimum(tableau, z_row, basic, nonbasic):
    """Bland's rule on variable ids; returns 'optimal' or 'unbounded'."""
    while True:
        col = -1
        best_id = None
        for j, var_id in enumerate(nonbasic):
            if z_row[j + 1] > TOL and (best_id is None or var_id < best_id):
                col, best_id = j, var_id
        if col < 0:
            return OPTIMAL
        row = -1
        best_ratio = math.inf
        best_basic = None
        for i in range(len(tableau)):
            coef = tableau[i][col + 1]
            if coef < -TOL:
                ratio = tableau[i][0] / -coef
                if ratio < best_ratio - TOL or (
                    abs(ratio - best_ratio) <= TOL
                    and (best_basic is None or basic[i] < best_basic)
                ):
                    row, best_ratio, best_basic = i, ratio, basic[i]
        if row < 0:
            return UNBOUNDED
        _pivot(tableau, z_row, basic, nonbasic, row, col)


def _simplex_max(c, rows_a, rows_b):
    """max c.y subject to rows_a . y <= rows_b, y >= 0.

    Returns (status, objective, values).  Dictionary form: each basic variable
    is an affine expression over the nonbasic ones.
    """
    m, n = len(rows_a), len(c)
    aux_id = n + m  # auxiliary infeasibility variable, highest id
    nonbasic = list(range(n))
    basic = [n + i for i in range(m)]
    tableau = [[rows_b[i]] + [-rows_a[i][j] for j in range(n)] for i in range(m)]

    if any(rows_b[i] < -TOL for i in range(m)):
        for row in tableau:
            row.append(1.0)  # + aux in every constraint expression
        nonbasic.append(aux_id)
        z_row = [0.0] * (n + 1) + [-1.0]  # maximize -aux
        worst = min(range(m), key=lambda i: tableau[i][0])
        _pivot(tableau, z_row, basic, nonbasic, worst, n)
        if _run_to_optimum(tableau, z_row, basic, nonbasic) != OPTIMAL or z_row[0] < -1e-7:
            return INFEASIBLE, None, None
        if aux_id in basic:  # degenerate: aux basic at value zero, drive it out
            i = basic.index(aux_id)
            for j in range(len(nonbasic)):
                if abs(tableau[i][j + 1]) > TOL:
                    _pivot(tableau, z_row, basic, nonbasic, i, j)
                    break
            else:  # row reduced to 0 = 0, drop it with its basic aux
                basic.pop(i)
                tableau.pop(i)
        if aux_id in nonbasic:
            col = nonbasic.index(aux_id)
            nonbasic.pop(col)
            for row in tableau:
                row.pop(col + 1)

    # objective over the current dictionary
    z_row = [0.0] * (len(nonbasic) + 1)
    for j, var_id in enumerate(nonbasic):
        if var_id < n:
            z_row[j + 1] += c[var_id]
    for i, var_id in enumerate(basic):
        if var_id < n and c[var_id] != 0.0:
            for k in range(len(nonbasic) + 1):
                z_row[k] += c[var_id] * tableau[i][k]

    if _run_to_optimum(tableau, z_row, basic, nonbasic) != OPTIMAL:
        return UNBOUNDED, None, None

    values = [0.0] * n
    for i, var_id in enumerate(basic):
        if var_id < n:
            values[var_id] = tableau[i][0]
    return OPTIMAL, z_row[0], values


class _Mapping:
    """Change of variables onto the nonnegative orthant."""

    def __init__(self, lower, upper):
        self.specs = []
        self.extra_rows = []  # (var index, upper bound) in original space
        width = 0
        for j, (lo, hi) in enumerate(zip(lower, upper)):
            if lo == -math.inf and hi == math.inf:
                self.specs.append(("split", width, width + 1, 0.0))
                width += 2
            elif lo == -math.inf:
                self.specs.append(("mirror", width, None, hi))
                width += 1
            else:
                self.specs.append(("shift", width, None, lo))
                if hi != math.inf:
                    self.extra_rows.append((j, hi))
                width += 1
        self.width = width

    def map_row(self, coeffs, rhs):
        out = [0.0] * self.width
        for j, a in enumerate(coeffs):
            if a == 0.0:
                continue
            kind, c1, c2, offset = self.specs[j]
            if kind == "split":
                out[c1] += a
                out[c2] -= a
            elif kind == "mirror":
                out[c1] -= a
                rhs -= a * offset
            else:
                out[c1] += a
                rhs -= a * offset
        return out, rhs

    def unmap(self, y):
        xs = []
        for kind, c1, c2, offset in self.specs:
            if kind == "split":
                xs.append(y[c1] - y[c2])
            elif kind == "mirror":
                xs.append(offset - y[c1])
            else:
                xs.append(offset + y[c1])
        return xs


def _solve_relaxed(c_max, rows, lower, upper):
    """rows: (coeffs, rel, rhs) with rel in {'<=', '>=', '=='}; returns (status, obj, x)."""
    mapping = _Mapping(lower, upper)
    le_rows = []
    for j, hi in mapping.extra_rows:
        unit = [0.0] * len(lower)
        unit[j] = 1.0
        le_rows.append(mapping.map_row(unit, hi))
    for coeffs, rel, rhs in rows:
        mapped, mapped_rhs = mapping.map_row(coeffs, rhs)
        if rel in ("<=", "=="):
            le_rows.append((mapped, mapped_rhs))
        if rel in (">=", "=="):
            le_rows.append(([-a for a in mapped], -mapped_rhs))

    c_mapped = [0.0] * mapping.width
    for j, a in enumerate(c_max):
        if a == 0.0:
            continue
        kind, c1, c2, _ = mapping.specs[j]
        if kind == "split":
            c_mapped[c1] += a
            c_mapped[c2] -= a
        elif kind == "mirror":
            c_mapped[c1] -= a
        else:
            c_mapped[c1] += a

    status, _, y = _simplex_max(c_mapped, [r for r, _ in le_rows], [b for _, b in le_rows])
    if status != OPTIMAL:
        return status, None, None
    x = mapping.unmap(y)
    objective = sum(a * v for a, v in zip(c_max, x))
    return OPTIMAL, objective, x


def solve(sense, objective, rows, lower, upper, is_integer):
    """Entry point: sense is 'min' or 'max'; returns (status, objective, values)."""
    sign = 1.0 if sense == "max" else -1.0
    c_max = [sign * a for a in objective]

    int_idx = [j for j, flag in enumerate(is_integer) if flag]
    root = _solve_relaxed(c_max, rows, lower, upper)
    if root[0] != OPTIMAL or not int_idx:
        status, obj, x = root
        if status != OPTIMAL:
            return status, None, None
        return status, sign * obj, x

    best = {"objective": -math.inf, "values": None}
    nodes = 0

    def branch(extra, node):
        nonlocal nodes
        nodes += 1
        if nodes > NODE_LIMIT:
            raise RuntimeError("branch-and-bound node limit exceeded")
        status, obj, x = node
        if status != OPTIMAL or obj <= best["objective"] + TOL:
            return
        fractional = None
        worst_frac = INT_TOL
        for j in int_idx:
            frac = abs(x[j] - round(x[j]))
            if frac > worst_frac:
                worst_frac, fractional = frac, j
        if fractional is None:
            snapped = list(x)
            for j in int_idx:
                snapped[j] = float(round(snapped[j]))
            value = sum(a * v for a, v in zip(c_max, snapped))
            if value > best["objective"]:
                best["objective"] = value
                best["values"] = snapped
            return
        v = x[fractional]
        unit = [0.0] * len(objective)
        unit[fractional] = 1.0
        down = extra + [(unit, "<=", math.floor(v + TOL))]
        up = extra + [(unit, ">=", math.ceil(v - TOL))]
        for child in (down, up):
            child_node = _solve_relaxed(c_max, rows + child, lower, upper)
            if child_node[0] == OPTIMAL:
                branch(child, child_node)

    branch([], root)
    if best["values"] is None:
        return INFEASIBLE, None, None
    return OPTIMAL, sign * best["objective"], best["values"]
