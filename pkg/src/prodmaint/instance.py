"""Problem data: products, machine, model options, fixtures and file I/O."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, Union

from .reliability import FailureTable, WeibullParams, failure_table

__all__ = [
    "ProductParams",
    "MachineParams",
    "ModelOptions",
    "ProblemInstance",
    "Violation",
    "InstanceError",
    "PRESETS",
    "FIXTURES",
    "validate",
    "load",
    "save",
    "dumps",
    "fixture",
    "with_options",
]

AgeConvention = Literal["start_of_period", "paper_literal"]
AGE_CONVENTIONS = ("start_of_period", "paper_literal")


class InstanceError(ValueError):
    """Raised for malformed or invalid instance documents."""


@dataclass(frozen=True)
class ProductParams:
    demand: tuple[int, ...]
    holding_cost: float
    backorder_cost: float
    setup_cost: float
    setup_time: float
    unit_cost: float
    unit_time: float

    def __post_init__(self):
        object.__setattr__(self, "demand", tuple(self.demand))


@dataclass(frozen=True)
class MachineParams:
    capacity: float
    repair_cost: float
    repair_time: float
    pm_cost: tuple[float, ...]
    pm_time: tuple[float, ...]
    failure: Union[WeibullParams, FailureTable]

    def __post_init__(self):
        object.__setattr__(self, "pm_cost", tuple(self.pm_cost))
        object.__setattr__(self, "pm_time", tuple(self.pm_time))
        if not isinstance(self.failure, (WeibullParams, FailureTable)):
            object.__setattr__(self, "failure", FailureTable(tuple(self.failure)))

    def failure_rates(self, T: int) -> tuple[float, ...]:
        """Expected failures per period for start ages ``0 .. T-1``."""
        if isinstance(self.failure, WeibullParams):
            return failure_table(self.failure, T).entries
        return self.failure.entries[:T]


@dataclass(frozen=True)
class ModelOptions:
    """Switches for the conventions the published formulation leaves open.

    ``failure_scale`` multiplies every expected failure count before it
    enters the corrective cost and time terms.
    """

    age_convention: AgeConvention = "start_of_period"
    failure_scale: float = 1.0
    periodic: bool = False
    integral_quantities: bool = True


PRESETS = {
    "default": ModelOptions(),
    "paper_tables": ModelOptions(failure_scale=0.5),
}


@dataclass(frozen=True)
class ProblemInstance:
    horizon: int
    products: tuple[ProductParams, ...]
    machine: MachineParams
    options: ModelOptions = field(default_factory=ModelOptions)

    def __post_init__(self):
        object.__setattr__(self, "products", tuple(self.products))

    @property
    def T(self) -> int:
        return self.horizon

    @property
    def P(self) -> int:
        return len(self.products)

    def failure_rates(self) -> tuple[float, ...]:
        """Unscaled expected failures ``e^l``, ``l = 1..T``."""
        return self.machine.failure_rates(self.horizon)

    def scaled_failure_rates(self) -> tuple[float, ...]:
        s = self.options.failure_scale
        return tuple(s * e for e in self.failure_rates())


def with_options(instance: ProblemInstance, preset: str | None = None, **changes) -> ProblemInstance:
    """Copy of ``instance`` with a named preset and/or option overrides applied."""
    opts = instance.options
    if preset is not None:
        if preset not in PRESETS:
            raise InstanceError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}")
        opts = PRESETS[preset]
    if changes:
        opts = replace(opts, **changes)
    return replace(instance, options=opts)


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


def _nonneg(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and x >= 0


def validate(instance: ProblemInstance) -> list[Violation]:
    """Check every data invariant; an empty list means the instance is valid."""
    out: list[Violation] = []
    T = instance.horizon
    if not isinstance(T, int) or T < 1:
        out.append(Violation("horizon", f"must be a positive integer, got {T!r}"))
        return out
    if not instance.products:
        out.append(Violation("products", "at least one product is required"))
    for i, p in enumerate(instance.products):
        base = f"products[{i}]"
        if len(p.demand) != T:
            out.append(Violation(f"{base}.demand", f"length {len(p.demand)} != horizon {T}"))
        for t, d in enumerate(p.demand):
            if not isinstance(d, int) or isinstance(d, bool) or d < 0:
                out.append(Violation(f"{base}.demand[{t}]", f"must be a nonnegative integer, got {d!r}"))
        for name in ("holding_cost", "backorder_cost", "setup_cost", "setup_time", "unit_cost"):
            if not _nonneg(getattr(p, name)):
                out.append(Violation(f"{base}.{name}", "must be finite and nonnegative"))
        if not (_nonneg(p.unit_time) and p.unit_time > 0):
            out.append(Violation(f"{base}.unit_time", "must be positive"))

    m = instance.machine
    if not (_nonneg(m.capacity) and m.capacity > 0):
        out.append(Violation("machine.capacity", f"must be positive, got {m.capacity!r}"))
    for name in ("repair_cost", "repair_time"):
        if not _nonneg(getattr(m, name)):
            out.append(Violation(f"machine.{name}", "must be finite and nonnegative"))
    for name in ("pm_cost", "pm_time"):
        seq = getattr(m, name)
        if len(seq) != T:
            out.append(Violation(f"machine.{name}", f"length {len(seq)} != horizon {T}"))
        if any(not _nonneg(v) for v in seq):
            out.append(Violation(f"machine.{name}", "entries must be finite and nonnegative"))
        elif any(b < a for a, b in zip(seq, seq[1:])):
            out.append(Violation(f"machine.{name}", "must be nondecreasing in machine age"))
    if isinstance(m.failure, FailureTable) and len(m.failure) < T:
        out.append(Violation("machine.failure_table", f"length {len(m.failure)} < horizon {T}"))
    elif _nonneg(m.capacity) and m.capacity > 0 and len(m.pm_time) == T:
        if all(v >= m.capacity for v in m.pm_time if _nonneg(v)):
            out.append(Violation("machine.pm_time", "every PM duration consumes the full capacity"))

    o = instance.options
    if o.age_convention not in AGE_CONVENTIONS:
        out.append(Violation("options.age_convention", f"must be one of {AGE_CONVENTIONS}"))
    if not (isinstance(o.failure_scale, (int, float)) and math.isfinite(o.failure_scale) and o.failure_scale > 0):
        out.append(Violation("options.failure_scale", "must be positive"))
    return out


# --- serialization ---------------------------------------------------------

_TOP_KEYS = {"horizon", "products", "machine", "options"}
_PRODUCT_KEYS = {"demand", "holding_cost", "backorder_cost", "setup_cost", "setup_time", "unit_cost", "unit_time"}
_MACHINE_KEYS = {"capacity", "repair_cost", "repair_time", "pm_cost", "pm_time", "weibull", "failure_table"}
_OPTION_KEYS = {"age_convention", "failure_scale", "periodic", "integral_quantities"}


def _num(x):
    """Render integral floats as ints so documents stay readable."""
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def to_dict(instance: ProblemInstance) -> dict[str, Any]:
    m = instance.machine
    machine: dict[str, Any] = {
        "capacity": _num(m.capacity),
        "repair_cost": _num(m.repair_cost),
        "repair_time": _num(m.repair_time),
        "pm_cost": [_num(v) for v in m.pm_cost],
        "pm_time": [_num(v) for v in m.pm_time],
    }
    if isinstance(m.failure, WeibullParams):
        machine["weibull"] = {"shape": _num(m.failure.shape), "scale": _num(m.failure.scale)}
    else:
        machine["failure_table"] = [_num(v) for v in m.failure.entries]
    o = instance.options
    return {
        "horizon": instance.horizon,
        "products": [
            {
                "demand": list(p.demand),
                "holding_cost": _num(p.holding_cost),
                "backorder_cost": _num(p.backorder_cost),
                "setup_cost": _num(p.setup_cost),
                "setup_time": _num(p.setup_time),
                "unit_cost": _num(p.unit_cost),
                "unit_time": _num(p.unit_time),
            }
            for p in instance.products
        ],
        "machine": machine,
        "options": {
            "age_convention": o.age_convention,
            "failure_scale": _num(o.failure_scale),
            "periodic": o.periodic,
            "integral_quantities": o.integral_quantities,
        },
    }


def dumps(instance: ProblemInstance) -> str:
    return json.dumps(to_dict(instance), indent=2) + "\n"


def save(instance: ProblemInstance, path: str | os.PathLike) -> None:
    Path(path).write_text(dumps(instance))


def _check_keys(section: str, doc: dict, allowed: set, required: set, strict: bool):
    if not isinstance(doc, dict):
        raise InstanceError(f"{section}: expected an object, got {type(doc).__name__}")
    missing = sorted(required - doc.keys())
    if missing:
        raise InstanceError(f"{section}: missing required key(s): {', '.join(missing)}")
    unknown = sorted(doc.keys() - allowed)
    if strict and unknown:
        raise InstanceError(f"{section}: unknown key(s): {', '.join(unknown)}")


def from_dict(doc: dict, strict: bool = True) -> ProblemInstance:
    _check_keys("document", doc, _TOP_KEYS, {"horizon", "products", "machine"}, strict)
    products = []
    if not isinstance(doc["products"], list):
        raise InstanceError("products: expected an array")
    for i, p in enumerate(doc["products"]):
        _check_keys(f"products[{i}]", p, _PRODUCT_KEYS, _PRODUCT_KEYS, strict)
        products.append(ProductParams(**{k: p[k] for k in _PRODUCT_KEYS}))
    m = doc["machine"]
    _check_keys("machine", m, _MACHINE_KEYS, {"capacity", "repair_cost", "repair_time", "pm_cost", "pm_time"}, strict)
    if ("weibull" in m) == ("failure_table" in m):
        raise InstanceError("machine: exactly one of 'weibull' or 'failure_table' is required")
    try:
        if "weibull" in m:
            w = m["weibull"]
            _check_keys("machine.weibull", w, {"shape", "scale"}, {"shape", "scale"}, strict)
            failure = WeibullParams(float(w["shape"]), float(w["scale"]))
        else:
            failure = FailureTable(tuple(m["failure_table"]))
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"machine: {exc}") from exc
    machine = MachineParams(
        capacity=m["capacity"],
        repair_cost=m["repair_cost"],
        repair_time=m["repair_time"],
        pm_cost=tuple(m["pm_cost"]),
        pm_time=tuple(m["pm_time"]),
        failure=failure,
    )
    o = doc.get("options", {})
    _check_keys("options", o, _OPTION_KEYS, set(), strict)
    options = ModelOptions(**{k: o[k] for k in _OPTION_KEYS if k in o})
    inst = ProblemInstance(horizon=doc["horizon"], products=tuple(products), machine=machine, options=options)
    problems = validate(inst)
    if problems:
        raise InstanceError("invalid instance:\n" + "\n".join(f"  {v}" for v in problems))
    return inst


def load(source: str | os.PathLike, strict: bool = True) -> ProblemInstance:
    """Read an instance from a JSON file path or a JSON text.

    Strings that look like a JSON object are parsed directly; anything else
    is treated as a path.
    """
    if isinstance(source, str) and source.lstrip().startswith("{"):
        text, origin = source, "<text>"
    else:
        text, origin = Path(source).read_text(), str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{origin}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return from_dict(doc, strict=strict)


# --- built-in data ----------------------------------------------------------

_DEMAND = (
    (22, 22, 22, 22, 23, 22, 20, 20),
    (25, 25, 22, 25, 23, 22, 20, 20),
)

# (pm_cost, pm_time) per dependency level, ages 1..8
_PM_TABLES = {
    "model_A": (
        (1613, 2016, 2520, 3150, 3937, 4922, 6152, 7690),
        (1.6, 2.0, 2.5, 3.2, 3.9, 4.9, 6.2, 7.7),
    ),
    "model_B": ((4000,) * 8, (4,) * 8),
    "dep_high": (
        (234, 422, 760, 1367, 2461, 4430, 7974, 14352),
        (0.2, 0.4, 0.8, 1.4, 2.5, 4.4, 8, 14.4),
    ),
    "dep_medium": (
        (650, 974, 1462, 2193, 3289, 4933, 7400, 11100),
        (0.6, 1.0, 1.5, 2.2, 3.3, 4.9, 7.4, 11.1),
    ),
    "dep_low": (
        (1940, 2327, 2793, 3351, 4022, 4826, 5791, 6950),
        (1.9, 2.3, 2.8, 3.3, 4, 4.8, 5.7, 6.9),
    ),
}
_PM_TABLES["indep_avg"] = _PM_TABLES["model_B"]

FIXTURES = tuple(_PM_TABLES)


def fixture(name: str, preset: str = "default") -> ProblemInstance:
    """Built-in eight-period, two-product instance.

    ``model_A`` has age-dependent PM cost and time, ``model_B`` and
    ``indep_avg`` the flat averages, and ``dep_high``/``dep_medium``/
    ``dep_low`` the three dependency levels that share the same averages.
    """
    if name not in _PM_TABLES:
        raise InstanceError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    if preset not in PRESETS:
        raise InstanceError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}")
    pm_cost, pm_time = _PM_TABLES[name]
    products = tuple(
        ProductParams(
            demand=d,
            holding_cost=40,
            backorder_cost=240,
            setup_cost=1000,
            setup_time=10,
            unit_cost=90,
            unit_time=3.6,
        )
        for d in _DEMAND
    )
    machine = MachineParams(
        capacity=200,
        repair_cost=2000,
        repair_time=12,
        pm_cost=pm_cost,
        pm_time=pm_time,
        failure=WeibullParams(shape=2.0, scale=2.0),
    )
    return ProblemInstance(horizon=8, products=products, machine=machine, options=PRESETS[preset])
