import json
import subprocess
import sys

import pytest

from prodmaint import cli, experiments
from prodmaint.evaluator import CSV_HEADER, plan_from_text
from prodmaint.instance import dumps, fixture, save
from prodmaint.milp import SolveResult, read_solution
from conftest import small_instance


@pytest.fixture
def small_file(tmp_path):
    path = tmp_path / "small.json"
    save(small_instance(3, [(2, 3, 1), (1, 1, 4)]), path)
    return path


def test_solve_writes_reports(small_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["solve", str(small_file), "--preset", "paper_tables", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert stdout.startswith("small: optimal objective=")
    stats, values = read_solution((out / "small.solution.txt").read_text())
    assert stats["status"] == "optimal"
    plan = plan_from_text((out / "small.plan.txt").read_text())
    assert plan.T == 3 and plan.P == 2
    lines = (out / "small.cost.csv").read_text().splitlines()
    assert lines[0] == ("# preset=paper_tables age_convention=start_of_period failure_scale=0.5 "
                        "periodic=false integral_quantities=true")
    assert lines[1] == CSV_HEADER
    assert float(lines[2].split(",")[-1]) == pytest.approx(float(stats["objective"]), abs=1e-6)


def test_solve_profile_flags(small_file, tmp_path, capsys):
    out = tmp_path / "o"
    assert cli.main(["solve", str(small_file), "--periodic", "--age-convention", "paper_literal",
                     "--relax-quantities", "--out", str(out)]) == 0
    head = (out / "small.cost.csv").read_text().splitlines()[0]
    assert "preset=instance" in head and "paper_literal" in head
    assert "periodic=true" in head and "integral_quantities=false" in head


def test_solve_fixture_by_name(tmp_path, capsys):
    assert cli.main(["solve", "--fixture", "dep_high", "--preset", "paper_tables",
                     "--out", str(tmp_path)]) == 0
    assert (tmp_path / "dep_high.cost.csv").exists()


def test_solve_limit_exit_code(tmp_path, capsys):
    code = cli.main(["solve", "--fixture", "model_A", "--preset", "paper_tables",
                     "--node-limit", "3", "--out", str(tmp_path)])
    assert code == 3
    assert "node_limit" in capsys.readouterr().out


def test_solve_infeasible_exit_code(small_file, tmp_path, monkeypatch, capsys):
    # a valid instance is never infeasible (the idle plan always fits), so stub the solve
    def infeasible(name, instance, config=None, pm_periods=None):
        return experiments.Scenario(name, instance, SolveResult("infeasible", names=[]),
                                    None, None, [], 0.0)

    monkeypatch.setattr(experiments, "solve_scenario", infeasible)
    assert cli.main(["solve", str(small_file), "--out", str(tmp_path)]) == 2
    assert "infeasible" in capsys.readouterr().out


def test_solve_rejects_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert cli.main(["solve", str(bad)]) == 1
    assert "bad.json:1:" in capsys.readouterr().err
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == 1
    assert cli.main(["solve"]) == 1
    assert cli.main(["solve", str(bad), "--fixture", "model_A"]) == 1


def test_validate_listing(small_file, tmp_path, capsys):
    assert cli.main(["validate", str(small_file)]) == 0
    assert capsys.readouterr().out == ""
    doc = json.loads(dumps(fixture("model_A")))
    doc["products"][0]["demand"] = doc["products"][0]["demand"][:-1]
    bad = tmp_path / "short.json"
    bad.write_text(json.dumps(doc))
    assert cli.main(["validate", str(bad)]) == 1
    listing = [l for l in capsys.readouterr().out.splitlines() if l.startswith("  ")]
    assert listing == ["  products[0].demand: length 7 != horizon 8"]


def test_unknown_fixture_lists_available(capsys):
    assert cli.main(["validate", "--fixture", "model_Z"]) == 1
    err = capsys.readouterr().err
    assert "model_A" in err and "dep_low" in err


def test_export_and_input_protection(small_file, tmp_path, capsys):
    assert cli.main(["export", str(small_file)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("\\ Problem:") and text.rstrip().endswith("End")
    out = tmp_path / "m.lp"
    assert cli.main(["export", str(small_file), "--out", str(out)]) == 0
    assert out.read_text() == text
    before = small_file.read_text()
    assert cli.main(["export", str(small_file), "--out", str(small_file)]) == 1
    assert "refusing to overwrite" in capsys.readouterr().err
    assert small_file.read_text() == before


@pytest.mark.parametrize("experiment", ["fig1", "nhpp"])
def test_reproduce_is_byte_identical(experiment, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["reproduce", experiment, "--out", str(a)]) == 0
    assert cli.main(["reproduce", experiment, "--out", str(b)]) == 0
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    csv_text = (a / f"{experiment}.csv").read_text()
    assert csv_text.startswith(f"# {experiment}: preset=paper_tables")
    assert csv_text.splitlines()[1] == "quantity,paper,computed,delta"
    if experiment == "fig1":
        svg = (a / "fig1.svg").read_text()
        assert svg.count("<polyline") == 8


def test_reproduce_seed_changes_the_simulation(tmp_path, capsys):
    cli.main(["reproduce", "nhpp", "--seed", "1", "--out", str(tmp_path / "s1")])
    cli.main(["reproduce", "nhpp", "--seed", "2", "--out", str(tmp_path / "s2")])
    assert (tmp_path / "s1/nhpp.csv").read_text() != (tmp_path / "s2/nhpp.csv").read_text()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "prodmaint", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("solve", "reproduce", "validate", "export"):
        assert cmd in proc.stdout
