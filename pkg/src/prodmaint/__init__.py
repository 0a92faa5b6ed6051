"""Integrated production planning and age-dependent preventive maintenance.

A capacitated multi-product lot-sizing model coupled with non-cyclical
preventive maintenance whose cost and duration grow with machine age,
solved exactly by a self-contained LP-based branch and bound.
"""
from .builder import build
from .evaluator import Plan, CostBreakdown, check, cost, cross_evaluate, decode, improvement
from .instance import FIXTURES, ProblemInstance, fixture, load, save, validate
from .milp import SolveConfig, SolveResult, solve_lp, solve_milp, verify
from .reliability import WeibullParams, expected_failures, failure_table, hazard

__all__ = [
    "build", "Plan", "CostBreakdown", "check", "cost", "cross_evaluate", "decode",
    "improvement", "FIXTURES", "ProblemInstance", "fixture", "load", "save", "validate",
    "SolveConfig", "SolveResult", "solve_lp", "solve_milp", "verify",
    "WeibullParams", "expected_failures", "failure_table", "hazard",
]
