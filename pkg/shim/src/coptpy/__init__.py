"""Drop-in stand-in for the COPT Python API, backed by a built-in exact solver.

Generated optimization scripts import this module under the usual name and
run hermetically: models built through the emulated surface are solved with
a small simplex/branch-and-bound engine, and any API member outside the
emulated subset raises the solver's invalid-member error.
"""

from __future__ import annotations

import math
from itertools import product

from coptpy import _solve

__all__ = ["COPT", "CoptError", "Envr", "Model", "Var", "LinExpr", "quicksum"]


class COPT:
    UNSTARTED = 0
    OPTIMAL = 1
    INFEASIBLE = 2
    UNBOUNDED = 3
    MINIMIZE = 1
    MAXIMIZE = -1
    INFINITY = 1e30
    CONTINUOUS = "C"
    INTEGER = "I"
    BINARY = "B"


class CoptError(AttributeError):
    """Solver-surface misuse; AttributeError so attribute probes degrade gracefully."""


def _invalid_member(name: str):
    return CoptError(f"Invalid attribute name '{name}'")


def _as_expr(value, model=None) -> "LinExpr":
    if isinstance(value, LinExpr):
        return value
    if isinstance(value, Var):
        return LinExpr(value._model, {value._index: 1.0}, 0.0)
    if isinstance(value, (int, float)):
        return LinExpr(model, {}, float(value))
    raise CoptError(f"Cannot build a linear expression from {type(value).__name__}")


class LinExpr:
    """Affine expression over decision variables; supports +, -, * by scalars."""

    def __init__(self, model, coeffs=None, constant=0.0):
        self._model = model
        self._coeffs = dict(coeffs or {})
        self._constant = float(constant)

    def _merge(self, other, sign: float) -> "LinExpr":
        other = _as_expr(other, self._model)
        coeffs = dict(self._coeffs)
        for index, coef in other._coeffs.items():
            coeffs[index] = coeffs.get(index, 0.0) + sign * coef
        model = self._model if self._model is not None else other._model
        return LinExpr(model, coeffs, self._constant + sign * other._constant)

    def __add__(self, other):
        return self._merge(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._merge(other, -1.0)

    def __rsub__(self, other):
        return _as_expr(other, self._model)._merge(self, -1.0)

    def __neg__(self):
        return LinExpr(self._model, {i: -c for i, c in self._coeffs.items()}, -self._constant)

    def __mul__(self, factor):
        if not isinstance(factor, (int, float)):
            raise CoptError("Only multiplication by a number is supported")
        return LinExpr(self._model, {i: c * factor for i, c in self._coeffs.items()},
                       self._constant * factor)

    __rmul__ = __mul__

    def __truediv__(self, divisor):
        return self.__mul__(1.0 / divisor)

    def __le__(self, other):
        return ConstrBuilder(self._merge(other, -1.0), "<=")

    def __ge__(self, other):
        return ConstrBuilder(self._merge(other, -1.0), ">=")

    def __eq__(self, other):  # noqa: PYI032 - comparison builds a constraint by design
        return ConstrBuilder(self._merge(other, -1.0), "==")

    __hash__ = object.__hash__

    def getValue(self) -> float:
        model = self._model
        if model is None or model.status != COPT.OPTIMAL:
            raise _invalid_member("getValue")
        return self._constant + sum(
            coef * model._values[index] for index, coef in self._coeffs.items())

    def addTerm(self, var: "Var", coeff: float) -> None:
        self._coeffs[var._index] = self._coeffs.get(var._index, 0.0) + float(coeff)
        if self._model is None:
            self._model = var._model

    def __getattr__(self, name):
        raise _invalid_member(name)


class Var:
    """One decision variable; the ``.x`` accessor exists only after a successful solve."""

    def __init__(self, model, index, lb, ub, vtype, name):
        self._model = model
        self._index = index
        self.lb = lb
        self.ub = ub
        self.vtype = vtype
        self.name = name

    def getName(self) -> str:
        return self.name

    def getType(self) -> str:
        return self.vtype

    def __getattr__(self, name):
        if name == "x":
            model = self.__dict__["_model"]
            if model.status == COPT.OPTIMAL:
                return model._values[self.__dict__["_index"]]
        raise _invalid_member(name)

    def _expr(self) -> LinExpr:
        return LinExpr(self._model, {self._index: 1.0}, 0.0)

    def __add__(self, other):
        return self._expr() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self._expr() - other

    def __rsub__(self, other):
        return _as_expr(other, self._model) - self._expr()

    def __neg__(self):
        return -self._expr()

    def __mul__(self, factor):
        return self._expr() * factor

    __rmul__ = __mul__

    def __truediv__(self, divisor):
        return self._expr() / divisor

    def __le__(self, other):
        return self._expr() <= other

    def __ge__(self, other):
        return self._expr() >= other

    def __eq__(self, other):  # noqa: PYI032
        return self._expr() == other

    __hash__ = object.__hash__

    def __repr__(self):
        return f"<Var {self.name or self._index}>"


class ConstrBuilder:
    """Pending linear constraint: expression relation zero."""

    def __init__(self, expr: LinExpr, relation: str):
        self.expr = expr
        self.relation = relation

    def __bool__(self):
        raise CoptError("A constraint cannot be evaluated as a boolean")


class Constraint:
    def __init__(self, name: str):
        self.name = name

    def getName(self) -> str:
        return self.name

    def __getattr__(self, name):
        raise _invalid_member(name)


def quicksum(terms) -> LinExpr:
    total = LinExpr(None, {}, 0.0)
    for term in terms:
        total = total + term
    return total


class Model:
    def __init__(self, name: str = ""):
        self.name = name
        self.status = COPT.UNSTARTED
        self._vars: list[Var] = []
        self._constraints: list[tuple[ConstrBuilder, str]] = []
        self._objective = LinExpr(self, {}, 0.0)
        self._sense = COPT.MINIMIZE
        self._values: list[float] | None = None
        self._objective_value: float | None = None

    def addVar(self, lb=0.0, ub=None, obj=0.0, vtype=COPT.CONTINUOUS, name="") -> Var:
        lb = float(lb)
        ub = math.inf if ub is None or ub >= COPT.INFINITY else float(ub)
        if vtype == COPT.BINARY:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        var = Var(self, len(self._vars), lb, ub, vtype, name or f"C{len(self._vars)}")
        self._vars.append(var)
        if obj:
            self._objective.addTerm(var, obj)
        return var

    def addVars(self, *indices, lb=0.0, ub=None, vtype=COPT.CONTINUOUS, nameprefix="") -> dict:
        if len(indices) == 1 and isinstance(indices[0], int):
            keys = list(range(indices[0]))
        elif len(indices) == 1:
            keys = list(indices[0])
        else:
            pools = [range(i) if isinstance(i, int) else list(i) for i in indices]
            keys = list(product(*pools))
        return {
            key: self.addVar(lb=lb, ub=ub, vtype=vtype, name=f"{nameprefix}({key})")
            for key in keys
        }

    def addConstr(self, constr, name: str = "") -> Constraint:
        if not isinstance(constr, ConstrBuilder):
            raise CoptError("addConstr expects a comparison between linear expressions")
        self._constraints.append((constr, name))
        return Constraint(name)

    def setObjective(self, expr, sense=None) -> None:
        self._objective = _as_expr(expr, self)
        if sense is not None:
            self._sense = sense

    def getObjective(self) -> LinExpr:
        return self._objective

    def solve(self) -> None:
        n = len(self._vars)
        objective = [0.0] * n
        for index, coef in self._objective._coeffs.items():
            objective[index] = coef
        rows = []
        for builder, _ in self._constraints:
            coeffs = [0.0] * n
            for index, coef in builder.expr._coeffs.items():
                coeffs[index] = coef
            rows.append((coeffs, builder.relation, -builder.expr._constant))
        lower = [v.lb for v in self._vars]
        upper = [v.ub for v in self._vars]
        integral = [v.vtype in (COPT.INTEGER, COPT.BINARY) for v in self._vars]
        sense = "min" if self._sense == COPT.MINIMIZE else "max"

        status, value, values = _solve.solve(sense, objective, rows, lower, upper, integral)
        if status == _solve.OPTIMAL:
            self.status = COPT.OPTIMAL
            self._values = values
            self._objective_value = value + self._objective._constant
        elif status == _solve.INFEASIBLE:
            self.status = COPT.INFEASIBLE
        else:
            self.status = COPT.UNBOUNDED

    def __getattr__(self, name):
        # only the emulated subset exists; everything else is the invalid-member error,
        # including result accessors before a successful solve
        if name == "objval":
            if self.__dict__.get("status") == COPT.OPTIMAL:
                return self.__dict__["_objective_value"]
        raise _invalid_member(name)


class Envr:
    def __init__(self, name: str = ""):
        self.name = name

    def createModel(self, name: str = "") -> Model:
        return Model(name)

    def __getattr__(self, name):
        raise _invalid_member(name)
