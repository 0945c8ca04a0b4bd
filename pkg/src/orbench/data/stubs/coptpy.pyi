from typing import Any, Iterable


class COPT:
    OPTIMAL: int
    INFEASIBLE: int
    UNBOUNDED: int
    UNSTARTED: int
    MINIMIZE: int
    MAXIMIZE: int
    INFINITY: float
    CONTINUOUS: str
    INTEGER: str
    BINARY: str


class LinExpr:
    def getValue(self) -> float:
        """Evaluate the expression at the current solution values."""
        ...

    def addTerm(self, var: "Var", coeff: float) -> None:
        """Append coeff * var to the expression."""
        ...


class Var:
    def getName(self) -> str:
        """Name the variable was created with."""
        ...

    def getType(self) -> str:
        """Variable type code: COPT.CONTINUOUS, COPT.INTEGER, or COPT.BINARY."""
        ...


class Constraint:
    def getName(self) -> str:
        """Name the constraint was created with."""
        ...


class Model:
    def addVar(self, lb: float = 0.0, ub: float = ..., obj: float = 0.0,
               vtype: str = ..., name: str = "") -> Var:
        """Add one decision variable and return it."""
        ...

    def addVars(self, *indices: Any, lb: float = 0.0, ub: float = ...,
                vtype: str = ..., nameprefix: str = "") -> dict:
        """Add a group of decision variables keyed by the given indices."""
        ...

    def addConstr(self, constr: Any, name: str = "") -> Constraint:
        """Add a linear constraint built from a comparison expression."""
        ...

    def setObjective(self, expr: Any, sense: int = ...) -> None:
        """Set the objective expression and optimization direction."""
        ...

    def getObjective(self) -> LinExpr:
        """Current objective expression."""
        ...

    def solve(self) -> None:
        """Optimize the model; afterwards status, objval, and Var.x are available."""
        ...

    def write(self, filename: str) -> None:
        """Write the model to a file."""
        ...


class Envr:
    def __init__(self, name: str = "") -> None:
        """Create a solver environment."""
        ...

    def createModel(self, name: str = "") -> Model:
        """Create an empty optimization model in this environment."""
        ...


def quicksum(terms: Iterable[Any]) -> LinExpr:
    """Sum an iterable of variables or expressions into one linear expression."""
    ...
