"""Shim fidelity criteria: verbatim sample programs, invalid-member behavior, and a
differential check against the exact reference solver from the evaluation harness."""

import math
import subprocess
import sys

import pytest

import coptpy as cp
from coptpy import COPT, CoptError

from orbench import solver
from orbench.sandbox import STATE_FOUND, SandboxConfig, execute_answer

pytestmark = pytest.mark.acceptance


def run_program(path, shim_src):
    return subprocess.run(
        [sys.executable, str(path)],
        capture_output=True, text=True, timeout=60,
        env={"PYTHONPATH": str(shim_src)},
    )


def test_trip_selection_program_runs_verbatim(programs_dir, shim_src):
    """The binary trip-selection program prints the exact oracle optimum."""
    reference = solver.solve_milp(solver.LinearProgram(
        solver.Sense.MINIMIZE,
        [1200.0, 1650.0, 750.0, 800.0, 800.0, 1500.0],
        [
            solver.row_eq([0, 0, 0, 0, 0, 1], 1),
            solver.row_le([1, 0, 0, 1, 0, 0], 1),
            solver.row_le([1, 0, 0, 0, 1, 0], 1),
            solver.row_le([0, 0, 0, -1, 1, 0], 0),
            solver.row_le([0, -1, 0, 0, 1, 0], 0),
            solver.row_ge([1, 1, 1, 1, 1, 1], 3),
            solver.row_le([1, 1, 1, 1, 1, 1], 4),
        ],
        integrality=[solver.VarKind.BINARY] * 6,
    ))
    assert reference.objective == 3050.0

    result = run_program(programs_dir / "trip_selection.py", shim_src)
    assert result.returncode == 0, result.stderr
    assert f"Minimum total cost: {reference.objective:.2f} dollars" in result.stdout
    for name in ("- Ron", "- Fred", "- Ginny"):
        assert name in result.stdout
    for name in ("- Harry", "- Hermione", "- George"):
        assert name not in result.stdout


def test_diet_program_runs_verbatim(programs_dir, shim_src):
    """The integer diet program prints the oracle optimum within a cent."""
    reference = solver.solve_milp(solver.LinearProgram(
        solver.Sense.MINIMIZE,
        [4.0, 2.0, 5.0, 10.0, 2.0, 8.0, 10.0, 9.0, 4.0],
        [
            solver.row_ge([15, 1, 1, 6, 3, 17, 18, 12, 2], 90),
            solver.row_ge([18, 25, 21, 3, 7, 13, 27, 17, 30], 105),
            solver.row_ge([300, 267, 266, 119, 166, 129, 216, 76, 258], 1805),
        ],
        integrality=[solver.VarKind.INTEGER] * 9,
    ))
    result = run_program(programs_dir / "diet_selection.py", shim_src)
    assert result.returncode == 0, result.stderr
    printed = float(result.stdout.strip())
    assert abs(printed - reference.objective) <= 0.01


def test_unknown_member_matches_invalid_attribute_pattern():
    model = cp.Envr().createModel("m")
    with pytest.raises(CoptError) as excinfo:
        model.update()
    assert "Invalid attribute name 'update'" in str(excinfo.value)


# ten models expressible through both the shim surface and the reference solver
DIFFERENTIAL_FIXTURES = [
    {
        "name": "printer",
        "sense": "max",
        "objective": [200.0, 70.0],
        "rows": [([1, 0], "<=", 20), ([0, 1], "<=", 30), ([1, 1], "<=", 35)],
        "kinds": "CC",
    },
    {
        "name": "staffing",
        "sense": "min",
        "objective": [5.0, 4.0],
        "rows": [([1, 1], ">=", 10), ([1, 0], "<=", 6), ([0, 1], "<=", 8)],
        "kinds": "CC",
    },
    {
        "name": "blend-equality",
        "sense": "min",
        "objective": [2.0, 3.0],
        "rows": [([1, 1], "==", 7), ([1, 0], "<=", 4)],
        "kinds": "CC",
    },
    {
        "name": "knapsack",
        "sense": "max",
        "objective": [10.0, 6.0, 4.0],
        "rows": [([5, 4, 3], "<=", 10)],
        "kinds": "BBB",
    },
    {
        "name": "gadgets",
        "sense": "max",
        "objective": [4.0, 5.0],
        "rows": [([2, 3], "<=", 12), ([1, 0], "<=", 3)],
        "kinds": "II",
    },
    {
        "name": "bakery",
        "sense": "max",
        "objective": [1.0, 1.0],
        "rows": [([1, 2], "<=", 8), ([3, 1], "<=", 9)],
        "kinds": "CC",
    },
    {
        "name": "negative-profit-mix",
        "sense": "max",
        "objective": [3.0, -2.0, 1.0],
        "rows": [([1, 1, 1], "<=", 9), ([1, -1, 0], ">=", 2), ([0, 0, 1], "<=", 4)],
        "kinds": "CCC",
    },
    {
        "name": "three-int-cover",
        "sense": "min",
        "objective": [7.0, 5.0, 3.0],
        "rows": [([2, 1, 1], ">=", 8), ([1, 3, 2], ">=", 10)],
        "kinds": "III",
    },
    {
        "name": "degenerate-ties",
        "sense": "max",
        "objective": [1.0, 1.0],
        "rows": [([1, 0], "<=", 5), ([0, 1], "<=", 5), ([1, 1], "<=", 10)],
        "kinds": "CC",
    },
    {
        "name": "mixed-int-cont",
        "sense": "max",
        "objective": [1.0, 2.0],
        "rows": [([3, 4], "<=", 12), ([0, 1], "<=", 1.5)],
        "kinds": "IC",
    },
]

_KIND = {"C": solver.VarKind.CONTINUOUS, "I": solver.VarKind.INTEGER, "B": solver.VarKind.BINARY}
_VTYPE = {"C": "C", "I": "I", "B": "B"}
_REL = {"<=": solver.Relation.LE, ">=": solver.Relation.GE, "==": solver.Relation.EQ}


def shim_solve(fixture):
    model = cp.Envr().createModel(fixture["name"])
    xs = [model.addVar(vtype=_VTYPE[k]) for k in fixture["kinds"]]
    expr = sum(c * x for c, x in zip(fixture["objective"], xs))
    model.setObjective(expr, COPT.MAXIMIZE if fixture["sense"] == "max" else COPT.MINIMIZE)
    for coeffs, rel, rhs in fixture["rows"]:
        lhs = sum(a * x for a, x in zip(coeffs, xs))
        constr = {"<=": lhs <= rhs, ">=": lhs >= rhs, "==": lhs == rhs}[rel]
        model.addConstr(constr)
    model.solve()
    assert model.status == COPT.OPTIMAL, fixture["name"]
    return model.objval


def reference_solve(fixture):
    rows = [solver.Row(tuple(float(a) for a in coeffs), _REL[rel], float(rhs))
            for coeffs, rel, rhs in fixture["rows"]]
    lp = solver.LinearProgram(
        solver.Sense.MAXIMIZE if fixture["sense"] == "max" else solver.Sense.MINIMIZE,
        fixture["objective"], rows,
        integrality=[_KIND[k] for k in fixture["kinds"]],
    )
    solution = solver.solve(lp)
    assert solution.status == solver.SolveStatus.OPTIMAL, fixture["name"]
    return solution.objective


def test_differential_against_reference_solver():
    """Shim optimum equals the reference solver's on all shared fixtures within 1e-6."""
    assert len(DIFFERENTIAL_FIXTURES) == 10
    for fixture in DIFFERENTIAL_FIXTURES:
        assert math.isclose(shim_solve(fixture), reference_solve(fixture),
                            abs_tol=1e-6), fixture["name"]


def test_sandbox_runs_shim_backed_scripts(shim_src):
    """The evaluation sandbox executes solver scripts hermetically via path injection."""
    answer = (
        "Model and code below.\n\n"
        "```python\n"
        "import coptpy as cp\n"
        "from coptpy import COPT\n"
        "env = cp.Envr()\n"
        "model = env.createModel('sandboxed')\n"
        "x = model.addVar(name='x')\n"
        "y = model.addVar(name='y')\n"
        "model.setObjective(200*x + 70*y, sense=COPT.MAXIMIZE)\n"
        "model.addConstr(x <= 20)\n"
        "model.addConstr(y <= 30)\n"
        "model.addConstr(x + y <= 35)\n"
        "model.solve()\n"
        "```\n"
    )
    record = execute_answer(answer, SandboxConfig(timeout=60, module_path=str(shim_src)))
    assert record.state == STATE_FOUND, record.state
    assert record.best_solution == "5050.0"
