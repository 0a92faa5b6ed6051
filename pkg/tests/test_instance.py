import json
from dataclasses import replace
from fractions import Fraction

import pytest

from prodmaint.instance import (
    FIXTURES,
    PRESETS,
    InstanceError,
    ModelOptions,
    dumps,
    fixture,
    load,
    save,
    validate,
    with_options,
)
from prodmaint.reliability import FailureTable, WeibullParams

# published problem data, typed in independently of the fixture module
DEMAND = ((22, 22, 22, 22, 23, 22, 20, 20), (25, 25, 22, 25, 23, 22, 20, 20))
PM = {
    "model_A": ((1613, 2016, 2520, 3150, 3937, 4922, 6152, 7690),
                (1.6, 2.0, 2.5, 3.2, 3.9, 4.9, 6.2, 7.7)),
    "model_B": ((4000,) * 8, (4,) * 8),
    "indep_avg": ((4000,) * 8, (4,) * 8),
    "dep_high": ((234, 422, 760, 1367, 2461, 4430, 7974, 14352),
                 (0.2, 0.4, 0.8, 1.4, 2.5, 4.4, 8, 14.4)),
    "dep_medium": ((650, 974, 1462, 2193, 3289, 4933, 7400, 11100),
                   (0.6, 1.0, 1.5, 2.2, 3.3, 4.9, 7.4, 11.1)),
    "dep_low": ((1940, 2327, 2793, 3351, 4022, 4826, 5791, 6950),
                (1.9, 2.3, 2.8, 3.3, 4, 4.8, 5.7, 6.9)),
}


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_tables_verbatim(name):
    inst = fixture(name)
    assert inst.horizon == 8
    assert tuple(p.demand for p in inst.products) == DEMAND
    for p in inst.products:
        assert (p.holding_cost, p.backorder_cost, p.setup_cost, p.setup_time,
                p.unit_cost, p.unit_time) == (40, 240, 1000, 10, 90, 3.6)
    m = inst.machine
    assert (m.capacity, m.repair_cost, m.repair_time) == (200, 2000, 12)
    assert m.failure == WeibullParams(2.0, 2.0)
    assert (m.pm_cost, m.pm_time) == PM[name]


def test_fixture_names_and_errors():
    assert set(FIXTURES) == set(PM)
    with pytest.raises(InstanceError, match="available: model_A"):
        fixture("model_C")
    with pytest.raises(InstanceError):
        fixture("model_A", preset="nope")


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_validate(name):
    assert validate(fixture(name)) == []


def _mean(values):
    return sum(Fraction(str(v)) for v in values) / len(values)


@pytest.mark.parametrize("name", ["model_A", "model_B", "indep_avg"])
def test_model_rows_average_exactly(name):
    m = fixture(name).machine
    assert _mean(m.pm_cost) == 4000
    assert _mean(m.pm_time) == 4


def test_dependency_level_rows_average_close_to_published():
    # the printed averages are rounded; the rows themselves are verbatim
    means = {n: (_mean(fixture(n).machine.pm_cost), _mean(fixture(n).machine.pm_time))
             for n in ("dep_high", "dep_medium", "dep_low")}
    assert means["dep_high"] == (4000, Fraction(321, 80))
    assert means["dep_medium"] == (Fraction(32001, 8), 4)
    assert means["dep_low"] == (4000, Fraction(317, 80))
    for cost_mean, time_mean in means.values():
        assert round(cost_mean) == 4000 and round(time_mean) == 4


def test_presets():
    assert PRESETS["default"] == ModelOptions()
    assert PRESETS["paper_tables"].failure_scale == 0.5
    inst = fixture("model_A", preset="paper_tables")
    assert inst.scaled_failure_rates()[0] == 0.125
    assert with_options(inst, "default", periodic=True).options == ModelOptions(periodic=True)
    with pytest.raises(InstanceError):
        with_options(inst, "nope")


def test_validate_reports_capacity():
    inst = fixture("model_A")
    bad = replace(inst, machine=replace(inst.machine, capacity=0))
    v = validate(bad)
    assert len(v) == 1 and v[0].path == "machine.capacity"


def test_validate_reports_demand_length():
    inst = fixture("model_A")
    p0 = replace(inst.products[0], demand=DEMAND[0][:-1])
    v = validate(replace(inst, products=(p0, inst.products[1])))
    assert len(v) == 1 and v[0].path == "products[0].demand"


@pytest.mark.parametrize("change,path", [
    (lambda i: replace(i, products=()), "products"),
    (lambda i: replace(i, machine=replace(i.machine, pm_cost=i.machine.pm_cost[::-1])), "machine.pm_cost"),
    (lambda i: replace(i, machine=replace(i.machine, pm_time=(300,) * 8)), "machine.pm_time"),
    (lambda i: replace(i, machine=replace(i.machine, failure=FailureTable((0.1,) * 3))), "machine.failure_table"),
    (lambda i: replace(i, options=ModelOptions(failure_scale=0)), "options.failure_scale"),
    (lambda i: replace(i, options=ModelOptions(age_convention="end")), "options.age_convention"),
    (lambda i: replace(i, products=(replace(i.products[0], unit_time=0),)), "products[0].unit_time"),
])
def test_validate_paths(change, path):
    paths = [v.path for v in validate(change(fixture("model_A")))]
    assert any(p.startswith(path) for p in paths), paths


@pytest.mark.parametrize("name", FIXTURES)
def test_save_load_round_trip(name, tmp_path):
    inst = fixture(name, preset="paper_tables")
    f = tmp_path / "i.json"
    save(inst, f)
    assert load(f) == inst
    assert load(dumps(inst)) == inst


def test_failure_table_round_trip():
    inst = fixture("model_A")
    inst = replace(inst, machine=replace(inst.machine, failure=FailureTable(PM["model_A"][1])))
    assert load(dumps(inst)) == inst


def test_load_errors():
    doc = json.loads(dumps(fixture("model_A")))
    del doc["machine"]
    with pytest.raises(InstanceError, match="machine"):
        load(json.dumps(doc))
    doc = json.loads(dumps(fixture("model_A")))
    doc["colour"] = 1
    doc["machine"]["paint"] = 2
    with pytest.raises(InstanceError, match="colour"):
        load(json.dumps(doc))
    with pytest.raises(InstanceError, match=r"<text>:1:"):
        load("{not json")
    doc = json.loads(dumps(fixture("model_A")))
    doc["machine"]["failure_table"] = [0.25]
    with pytest.raises(InstanceError, match="exactly one"):
        load(json.dumps(doc))


def test_load_non_strict_ignores_unknown_keys():
    doc = json.loads(dumps(fixture("model_A")))
    doc["note"] = "hello"
    assert load(json.dumps(doc), strict=False) == fixture("model_A")


def test_load_reports_all_violations():
    doc = json.loads(dumps(fixture("model_A")))
    doc["machine"]["capacity"] = -1
    doc["products"][1]["demand"] = [1, 2]
    with pytest.raises(InstanceError) as exc:
        load(json.dumps(doc))
    assert "machine.capacity" in str(exc.value)
    assert "products[1].demand" in str(exc.value)
