"""Generic MILP container with semantically tagged variables."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = ["VarRef", "Variable", "Constraint", "MilpModel", "VAR_KINDS", "ModelError"]

# kind -> index names carried by the tag
VAR_KINDS: dict[str, tuple[str, ...]] = {
    "x": ("p", "t"),
    "I": ("p", "t"),
    "B": ("p", "t"),
    "y": ("p", "t"),
    "Y": ("t",),
    "Z": ("t",),
    "z": ("t", "l"),
    "w": ("t", "l"),
    "a": ("t",),
    "E": ("t",),
    "CPM": ("t",),
    "CRM": ("t",),
    "TPM": ("t",),
    "TRM": ("t",),
    "PL": ("l",),
}

SENSES = ("<=", "=", ">=")
VAR_TYPES = ("continuous", "integer", "binary")


class ModelError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class VarRef:
    """Semantic tag of a decision variable; indices are 1-based."""

    kind: str
    p: int | None = None
    t: int | None = None
    l: int | None = None

    def __post_init__(self):
        if self.kind not in VAR_KINDS:
            raise ModelError(f"unknown variable kind {self.kind!r}")
        want = VAR_KINDS[self.kind]
        have = tuple(k for k in ("p", "t", "l") if getattr(self, k) is not None)
        if have != want:
            raise ModelError(f"{self.kind} takes indices {want}, got {have}")

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(getattr(self, k) for k in VAR_KINDS[self.kind])

    @property
    def name(self) -> str:
        return "_".join([self.kind, *map(str, self.indices)])

    @classmethod
    def parse(cls, name: str) -> "VarRef":
        kind, *rest = name.split("_")
        if kind not in VAR_KINDS or not all(r.isdigit() for r in rest):
            raise ModelError(f"not a tagged variable name: {name!r}")
        keys = VAR_KINDS[kind]
        if len(rest) != len(keys):
            raise ModelError(f"{name!r}: {kind} takes {len(keys)} indices")
        return cls(kind, **{k: int(v) for k, v in zip(keys, rest)})

    def __str__(self):
        return self.name


@dataclass
class Variable:
    name: str
    vtype: str = "continuous"
    lb: float = 0.0
    ub: float = math.inf
    tag: VarRef | None = None

    @property
    def is_integer(self) -> bool:
        return self.vtype != "continuous"


@dataclass
class Constraint:
    name: str
    coefs: dict[int, float]
    sense: str
    rhs: float

    def bounds(self) -> tuple[float, float]:
        if self.sense == "<=":
            return -math.inf, self.rhs
        if self.sense == ">=":
            return self.rhs, math.inf
        return self.rhs, self.rhs


_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_.]*$")


@dataclass
class MilpModel:
    """Minimization problem ``min c.x`` over linear rows and variable bounds."""

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    meta: dict[str, object] = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)
    _rows: dict[str, int] = field(default_factory=dict, repr=False)

    # -- construction --------------------------------------------------------

    def add_var(self, name: str | VarRef, vtype: str = "continuous", lb: float = 0.0,
                ub: float = math.inf, tag: VarRef | None = None) -> int:
        if isinstance(name, VarRef):
            tag, name = name, name.name
        if vtype not in VAR_TYPES:
            raise ModelError(f"unknown variable type {vtype!r}")
        if vtype == "binary":
            lb, ub = max(0.0, lb), min(1.0, ub)
        if name in self._index:
            raise ModelError(f"duplicate variable {name!r}")
        if not _NAME_RE.match(name):
            raise ModelError(f"invalid variable name {name!r}")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, vtype, float(lb), float(ub), tag))
        return self._index[name]

    def add_constraint(self, name: str, coefs: Mapping[int, float] | Iterable[tuple[int, float]],
                       sense: str, rhs: float) -> int:
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        if name in self._rows:
            raise ModelError(f"duplicate constraint {name!r}")
        items = coefs.items() if isinstance(coefs, Mapping) else coefs
        merged: dict[int, float] = {}
        for j, a in items:
            merged[j] = merged.get(j, 0.0) + float(a)
        merged = {j: a for j, a in merged.items() if a != 0.0}
        self._rows[name] = len(self.constraints)
        self.constraints.append(Constraint(name, merged, sense, float(rhs)))
        return self._rows[name]

    def set_objective(self, coefs: Mapping[int, float] | Iterable[tuple[int, float]]) -> None:
        items = coefs.items() if isinstance(coefs, Mapping) else coefs
        obj: dict[int, float] = {}
        for j, a in items:
            obj[j] = obj.get(j, 0.0) + float(a)
        self.objective = {j: a for j, a in obj.items() if a != 0.0}

    # -- lookup --------------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.constraints)

    def index(self, name: str | VarRef) -> int:
        key = name.name if isinstance(name, VarRef) else name
        return self._index[key]

    def var(self, name: str | VarRef) -> Variable:
        return self.variables[self.index(name)]

    def has_var(self, name: str | VarRef) -> bool:
        key = name.name if isinstance(name, VarRef) else name
        return key in self._index

    def row(self, name: str) -> Constraint:
        return self.constraints[self._rows[name]]

    def has_row(self, name: str) -> bool:
        return name in self._rows

    def tags(self) -> list[VarRef | None]:
        return [v.tag for v in self.variables]

    # -- checks / arrays -----------------------------------------------------

    def check(self) -> list[str]:
        """Structural invariants; returns human-readable problems."""
        out = []
        for v in self.variables:
            if v.lb > v.ub:
                out.append(f"{v.name}: lower bound {v.lb} exceeds upper bound {v.ub}")
            if v.is_integer and not (math.isfinite(v.lb) and math.isfinite(v.ub)):
                out.append(f"{v.name}: integer variable needs finite bounds")
            if v.vtype == "binary" and (v.lb < 0 or v.ub > 1):
                out.append(f"{v.name}: binary bounds must lie in [0, 1]")
        for c in self.constraints:
            if not math.isfinite(c.rhs) or any(not math.isfinite(a) for a in c.coefs.values()):
                out.append(f"{c.name}: non-finite coefficient")
        if any(not math.isfinite(a) for a in self.objective.values()):
            out.append("objective: non-finite coefficient")
        return out

    def arrays(self):
        """Dense ``(c, A, row_lo, row_hi, lb, ub, is_int)`` for the solvers."""
        n, m = self.n_vars, self.n_rows
        c = np.zeros(n)
        for j, a in self.objective.items():
            c[j] = a
        A = np.zeros((m, n))
        lo = np.empty(m)
        hi = np.empty(m)
        for i, con in enumerate(self.constraints):
            for j, a in con.coefs.items():
                A[i, j] = a
            lo[i], hi[i] = con.bounds()
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        is_int = np.array([v.is_integer for v in self.variables], dtype=bool)
        return c, A, lo, hi, lb, ub, is_int

    def objective_value(self, x) -> float:
        return math.fsum(a * float(x[j]) for j, a in self.objective.items())

    def assignment(self, x) -> dict[str, float]:
        return {v.name: float(x[j]) for j, v in enumerate(self.variables)}

    def vector(self, assignment: Mapping[str, float]) -> np.ndarray:
        missing = [v.name for v in self.variables if v.name not in assignment]
        if missing:
            raise ModelError(f"assignment misses {len(missing)} variable(s), e.g. {missing[0]}")
        return np.array([float(assignment[v.name]) for v in self.variables])
