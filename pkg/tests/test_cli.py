import csv
import json

import pytest
from click.testing import CliRunner

import rro.tasks
from rro.config import reload_settings
from rro.errors import InvariantViolation
from rro_cli import cli

from conftest import instance_path


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _solve(runner, tmp_path, in_path, *flags):
    out = tmp_path / "plan.json"
    result = runner.invoke(cli, ["solve", "--in", in_path, "--out", str(out), *flags])
    assert result.exit_code == 0, result.output
    return json.loads(out.read_text()), str(out)


# --- solve ---

def test_solve_youtube(runner, tmp_path):
    plan, _ = _solve(runner, tmp_path, instance_path("youtube.json"))
    assert [row["to"] for row in plan["assignments"]] == pytest.approx([3575, 3575, 3575, 3575, 6000], abs=1e-4)
    assert plan["solver"] == "iterative"


def test_solve_youtube_fastpath(runner, tmp_path):
    plan, _ = _solve(runner, tmp_path, instance_path("youtube.json"), "--fastpath")
    assert [row["to"] for row in plan["assignments"]] == pytest.approx([3575, 3575, 3575, 3575, 6000], abs=1e-6)
    assert plan["solver"] == "unimodal"


def test_per_entry_budget_gives_the_same_plan(runner, tmp_path):
    doc = {"supported": [100, 500, 700, 3000, 6000], "complement": {"exponential": {"lambda": 0.8}}}
    total = _write(tmp_path, "total.json", {**doc, "budget": {"total": 10000}})
    per_entry = _write(tmp_path, "per_entry.json", {**doc, "budget": {"per_entry": 2000}})
    first, _ = _solve(runner, tmp_path, total, "--fastpath")
    second, _ = _solve(runner, tmp_path, per_entry, "--fastpath")
    assert first["assignments"] == second["assignments"]


def test_resolving_at_the_spent_budget_is_idempotent(runner, tmp_path):
    plan, _ = _solve(runner, tmp_path, instance_path("micro.json"))
    again = _write(tmp_path, "again.json", {
        "supported": [5, 12], "complement": {"empirical": [10, 20]}, "budget": {"total": plan["budget_used"]},
    })
    replay, _ = _solve(runner, tmp_path, again)
    assert replay["assignments"] == plan["assignments"]


def test_malformed_json_exits_2(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{oops")
    result = runner.invoke(cli, ["solve", "--in", str(path)])
    assert result.exit_code == 2


def test_empty_complement_exits_2(runner, tmp_path):
    path = _write(tmp_path, "empty.json", {"supported": [1], "complement": {"empirical": []}, "budget": {"total": 1}})
    result = runner.invoke(cli, ["solve", "--in", path])
    assert result.exit_code == 2
    assert "empty complement" in result.output


def test_fastpath_needs_a_unimodal_complement(runner):
    result = runner.invoke(cli, ["solve", "--in", instance_path("micro.json"), "--fastpath"])
    assert result.exit_code == 2
    assert "iterative_solve" in result.output


def test_invariant_violation_exits_3(runner, monkeypatch):
    def broken(*args):
        raise InvariantViolation(["utility decreased"])

    monkeypatch.setattr(rro.tasks, "assert_plan", broken)
    result = runner.invoke(cli, ["solve", "--in", instance_path("micro.json")])
    assert result.exit_code == 3
    assert "utility decreased" in result.output


# --- sweep ---

def _sweep(runner, tmp_path, *args):
    out = tmp_path / "sweep.csv"
    result = runner.invoke(cli, ["sweep", "--in", instance_path("micro.json"), "--out", str(out), *args])
    return result, out


def test_sweep_budgets_rise_as_alpha_falls(runner, tmp_path):
    result, out = _sweep(runner, tmp_path, "--alpha-min", "0.04", "--alpha-max", "0.06", "--steps", "3")
    assert result.exit_code == 0, result.output
    with open(out) as f:
        rows = list(csv.DictReader(f))
    assert [float(r["budget_used"]) for r in rows] == [13, 23, 23]
    alphas = [float(r["alpha"]) for r in rows]
    assert alphas == sorted(alphas, reverse=True)
    assert set(rows[0]) == {"alpha", "budget_used", "next_alpha", "utility"}


def test_sweep_two_steps_are_the_endpoints(runner, tmp_path):
    result, out = _sweep(runner, tmp_path, "--alpha-min", "0.04", "--alpha-max", "0.06", "--steps", "2")
    assert result.exit_code == 0, result.output
    with open(out) as f:
        rows = list(csv.DictReader(f))
    assert [float(r["alpha"]) for r in rows] == [0.06, 0.04]


@pytest.mark.parametrize("args", [("--alpha-min", "0", "--alpha-max", "0.06"),
                                  ("--alpha-min", "0.06", "--alpha-max", "0.04"),
                                  ("--alpha-min", "0.04", "--alpha-max", "0.06", "--steps", "1")])
def test_sweep_bad_range_exits_2(runner, tmp_path, args):
    result, _ = _sweep(runner, tmp_path, *args)
    assert result.exit_code == 2


# --- oracle and utility ---

def test_oracle_micro(runner):
    result = runner.invoke(cli, ["oracle", "--in", instance_path("micro.json")])
    assert result.exit_code == 0, result.output
    assert "best utility: 1/2" in result.output
    assert "5->10, 12->20" in result.output


def test_oracle_rejects_analytic_complements(runner):
    result = runner.invoke(cli, ["oracle", "--in", instance_path("youtube.json")])
    assert result.exit_code == 2
    assert "oracle requires empirical complement" in result.output


def test_oracle_rejects_oversize_instances(runner, tmp_path):
    path = _write(tmp_path, "big.json", {
        "supported": list(range(1, 8)), "complement": {"empirical": [10, 20]}, "budget": {"total": 5},
    })
    result = runner.invoke(cli, ["oracle", "--in", path])
    assert result.exit_code == 2


def test_utility(runner, tmp_path):
    result = runner.invoke(cli, ["utility", "--in", instance_path("micro.json")])
    assert result.exit_code == 0
    assert "exact: -1/2" in result.output
    _, plan_path = _solve(runner, tmp_path, instance_path("micro.json"))
    result = runner.invoke(cli, ["utility", "--in", instance_path("micro.json"), "--plan", plan_path])
    assert "exact: 1/2" in result.output


# --- plot ---

def test_plot_draws_one_chord_per_target(runner, tmp_path):
    plan, plan_path = _solve(runner, tmp_path, instance_path("micro.json"))
    svg = tmp_path / "micro.svg"
    result = runner.invoke(cli, ["plot", "--in", instance_path("micro.json"), "--plan", plan_path, "--out", str(svg)])
    assert result.exit_code == 0, result.output
    text = svg.read_text()
    assert text.count('id="chord-') == len(plan["targets"])
    assert 'id="reinforced-area"' in text
    assert (tmp_path / "micro.csv").exists()


def test_plot_rejects_a_plan_from_another_instance(runner, tmp_path):
    _, plan_path = _solve(runner, tmp_path, instance_path("micro.json"))
    other = _write(tmp_path, "other.json", {
        "supported": [5, 12], "complement": {"empirical": [10, 20]}, "budget": {"total": 14},
    })
    result = runner.invoke(cli, ["plot", "--in", other, "--plan", plan_path, "--out", str(tmp_path / "x.svg")])
    assert result.exit_code == 2


# --- configuration ---

def test_check_config(runner):
    result = runner.invoke(cli, ["check-config"])
    assert result.exit_code == 0
    assert "Plot canvas: 960x720" in result.output


def test_config_option_reloads_settings(runner, tmp_path):
    cfg = tmp_path / "config.yml"
    cfg.write_text("oracle:\n  max_supported: 1\n")
    try:
        result = runner.invoke(cli, ["--config", str(cfg), "oracle", "--in", instance_path("micro.json")])
        assert result.exit_code == 2
    finally:
        reload_settings(None)


def test_bad_config_file_exits_2(runner, tmp_path):
    cfg = tmp_path / "config.yml"
    cfg.write_text("solver: [unclosed")
    result = runner.invoke(cli, ["--config", str(cfg), "check-config"])
    assert result.exit_code == 2


def test_check_config_shows_the_file_passed_with_config(runner, tmp_path):
    cfg = tmp_path / "config.yml"
    cfg.write_text("plot:\n  width_px: 800\n")
    try:
        result = runner.invoke(cli, ["--config", str(cfg), "check-config"])
        assert result.exit_code == 0
        assert "Plot canvas: 800x720" in result.output
    finally:
        reload_settings(None)
