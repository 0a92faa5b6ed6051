"""Shared, session-cached solves of the built-in fixtures.

Each 8-period solve takes seconds to tens of seconds, so every test that
needs one goes through :func:`scenario` and the work is done once.
"""
from __future__ import annotations

from dataclasses import replace

import pytest

from prodmaint.experiments import Scenario, solve_scenario
from prodmaint.instance import fixture, with_options

_CACHE: dict[tuple, Scenario] = {}


def scenario(name: str, preset: str = "paper_tables", periodic: bool = False,
             pm_periods: tuple[int, ...] | None = None) -> Scenario:
    key = (name, preset, periodic, pm_periods)
    if key not in _CACHE:
        inst = with_options(fixture(name), preset, periodic=periodic)
        label = f"{name}{'-periodic' if periodic else ''}"
        _CACHE[key] = solve_scenario(label, inst, pm_periods=pm_periods)
    return _CACHE[key]


@pytest.fixture(scope="session")
def solved():
    """Callable returning cached :class:`Scenario` objects."""
    return scenario


def small_instance(T: int, demands, **machine_changes):
    """A fixture-A shaped instance cut down to ``T`` periods."""
    base = fixture("model_A")
    prods = tuple(replace(base.products[p], demand=tuple(d)) for p, d in enumerate(demands))
    m = base.machine
    machine = replace(m, pm_cost=m.pm_cost[:T], pm_time=m.pm_time[:T], **machine_changes)
    return replace(base, horizon=T, products=prods, machine=machine)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(ACCEPTANCE[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
