"""CPLEX-style LP text export and import.

The writer is deterministic: variables and rows keep model order, numbers
use the shortest round-tripping decimal form, and long rows wrap at a fixed
term count.  The reader accepts the writer's output and the common variants
of the format (``=<``/``=>`` senses, ``free`` bounds, ``Generals``), which is
enough to feed models produced elsewhere to :func:`prodmaint.milp.solve_milp`.
"""
from __future__ import annotations

import math
import re

from .model import MilpModel, ModelError, VarRef

__all__ = ["export", "parse", "LPFormatError"]

_WRAP = 8  # terms per line


class LPFormatError(ValueError):
    pass


def _num(v: float) -> str:
    if v == math.inf:
        return "+inf"
    if v == -math.inf:
        return "-inf"
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _terms(coefs, names) -> list[str]:
    out = []
    for k, (j, a) in enumerate(coefs):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = names[j] if mag == 1 else f"{_num(mag)} {names[j]}"
        out.append(f"{sign} {body}" if k or sign == "-" else body)
    return out


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines = []
    for i in range(0, max(len(terms), 1), _WRAP):
        chunk = " ".join(terms[i:i + _WRAP])
        lines.append((f" {head} " if i == 0 else "   ") + chunk)
    lines[-1] += tail
    return lines


def export(model: MilpModel) -> str:
    """LP text for ``model``; identical models give identical bytes."""
    names = [v.name for v in model.variables]
    lines = [f"\\ Problem: {model.name}", "Minimize"]
    obj = _terms(sorted(model.objective.items()), names)
    lines += _wrap("obj:", obj or ([f"0 {names[0]}"] if names else []))
    lines.append("Subject To")
    for con in model.constraints:
        terms = _terms(sorted(con.coefs.items()), names)
        if not terms:
            terms = [f"0 {names[0]}"]
        lines += _wrap(f"{con.name}:", terms, f" {con.sense} {_num(con.rhs)}")
    lines.append("Bounds")
    # every column is listed, in model order, so a re-import keeps that order
    for v in model.variables:
        lo, hi = v.lb, v.ub
        if lo == -math.inf and hi == math.inf:
            lines.append(f" {v.name} free")
        else:
            lines.append(f" {_num(lo)} <= {v.name} <= {_num(hi)}")
    gens = [v.name for v in model.variables if v.vtype == "integer"]
    bins = [v.name for v in model.variables if v.vtype == "binary"]
    for head, group in (("General", gens), ("Binary", bins)):
        if group:
            lines.append(head)
            for i in range(0, len(group), _WRAP):
                lines.append(" " + " ".join(group[i:i + _WRAP]))
    lines.append("End")
    return "\n".join(lines) + "\n"


# --- reader -------------------------------------------------------------------

_SECTIONS = {
    "minimize": "obj", "minimum": "obj", "min": "obj",
    "maximize": "max", "maximum": "max", "max": "max",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "general": "gen", "generals": "gen", "gen": "gen",
    "binary": "bin", "binaries": "bin", "bin": "bin",
    "end": "end",
}
_TOKEN = re.compile(r"[<>=]+|[+-]|[A-Za-z_][\w.\[\]]*|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|:")
_SENSE = {"<=": "<=", "=<": "<=", "<": "<=", ">=": ">=", "=>": ">=", ">": ">=", "=": "="}


def _parse_expr(tokens: list[str], where: str) -> list[tuple[str, float]]:
    terms, sign, coef, i = [], 1.0, None, 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
            if coef is not None:
                raise LPFormatError(f"{where}: dangling coefficient before {tok!r}")
        elif tok[0].isdigit() or tok[0] == ".":
            coef = float(tok)
        else:
            terms.append((tok, sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
        i += 1
    if coef is not None:
        raise LPFormatError(f"{where}: constant term in expression is not supported")
    return terms


def _value(tok: str, sign: float = 1.0) -> float:
    try:
        return sign * float(tok)  # also takes +inf / -infinity
    except ValueError:
        raise LPFormatError(f"not a number: {tok!r}") from None


def parse(text: str) -> MilpModel:
    """Read LP text back into a :class:`MilpModel`.

    Variables listed in the ``Bounds`` section come first, in that order,
    followed by any others in order of first mention; names that follow the
    model's tag pattern regain their :class:`VarRef`.
    """
    section = None
    statements: dict[str, list[str]] = {k: [] for k in ("obj", "st", "bounds", "gen", "bin")}
    name = "model"
    for lineno, raw in enumerate(text.splitlines(), 1):
        if raw.startswith("\\"):
            m = re.match(r"\\\s*Problem:\s*(\S+)", raw)
            if m:
                name = m.group(1)
            continue
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = _SECTIONS.get(line.lower())
        if key is not None:
            if key == "max":
                raise LPFormatError(f"line {lineno}: only minimization is supported")
            section = key
            continue
        if section is None:
            raise LPFormatError(f"line {lineno}: text before the objective section")
        if section == "end":
            raise LPFormatError(f"line {lineno}: text after End")
        statements[section].append(line)
    if section != "end":
        raise LPFormatError("missing End")

    order: dict[str, None] = {}

    def see(var):
        order.setdefault(var, None)

    obj_tokens = _TOKEN.findall(" ".join(statements["obj"]))
    if len(obj_tokens) >= 2 and obj_tokens[1] == ":":
        obj_tokens = obj_tokens[2:]
    objective = _parse_expr(obj_tokens, "objective")
    for v, _ in objective:
        see(v)

    # constraints may wrap; a statement ends at its sense and right-hand side
    rows = []
    pending: list[str] = []
    for line in statements["st"]:
        pending += _TOKEN.findall(line)
        senses = [k for k, t in enumerate(pending) if t in _SENSE]
        if senses and senses[0] + 1 < len(pending):
            k = senses[0]
            rhs_tokens = pending[k + 1:]
            if rhs_tokens[0] in "+-":
                rhs = _value(rhs_tokens[1], -1.0 if rhs_tokens[0] == "-" else 1.0)
            else:
                rhs = _value(rhs_tokens[0])
            body = pending[:k]
            rname = None
            if len(body) >= 2 and body[1] == ":":
                rname, body = body[0], body[2:]
            rname = rname or f"R{len(rows) + 1}"
            terms = _parse_expr(body, rname)
            for v, _ in terms:
                see(v)
            rows.append((rname, terms, _SENSE[pending[k]], rhs))
            pending = []
    if pending:
        raise LPFormatError("unterminated constraint at end of section")

    bounds: dict[str, list[float]] = {}
    for line in statements["bounds"]:
        toks = line.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            bounds[toks[0]] = [-math.inf, math.inf]
            see(toks[0])
            continue
        if len(toks) == 5 and _SENSE.get(toks[1]) == "<=" and _SENSE.get(toks[3]) == "<=":
            var = toks[2]
            bounds[var] = [_value(toks[0]), _value(toks[4])]
            see(var)
            continue
        if len(toks) == 3 and toks[1] in _SENSE:
            var, sense, val = toks
            v = _value(val)
            lo, hi = bounds.get(var, [0.0, math.inf])
            if _SENSE[sense] == "<=":
                hi = v
            elif _SENSE[sense] == ">=":
                lo = v
            else:
                lo = hi = v
            bounds[var] = [lo, hi]
            see(var)
            continue
        raise LPFormatError(f"cannot read bound {line!r}")

    vtypes: dict[str, str] = {}
    for kind, sec in (("integer", "gen"), ("binary", "bin")):
        for line in statements[sec]:
            for var in line.split():
                vtypes[var] = kind
                see(var)

    mdl = MilpModel(name=name)
    index = {}
    for var in list(bounds) + [v for v in order if v not in bounds]:
        try:
            tag = VarRef.parse(var)
        except ModelError:
            tag = None
        lo, hi = bounds.get(var, [0.0, 1.0] if vtypes.get(var) == "binary" else [0.0, math.inf])
        index[var] = mdl.add_var(var, vtypes.get(var, "continuous"), lo, hi, tag=tag)
    mdl.set_objective([(index[v], a) for v, a in objective])
    for rname, terms, sense, rhs in rows:
        mdl.add_constraint(rname, [(index[v], a) for v, a in terms], sense, rhs)
    return mdl
