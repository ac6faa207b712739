import csv

import pytest

from rro.iterative_solver import iterative_solve
from rro.plotting import plot_series, render_plan
from rro.schemas import PlanFile
from rro.score_model import EmpiricalComplement, LogNormalComplement, SupportedSet

from conftest import WORKED_COMPLEMENT, WORKED_SUPPORTED


def _plan(supported, model, budget):
    return PlanFile.from_plan(iterative_solve(supported, model, budget))


def test_series_cover_both_cdfs_and_every_chord(micro):
    supported, model = micro
    plan = _plan(supported, model, 13)
    names = [name for name, _, _ in plot_series(supported, model, plan)]
    assert names[:3] == ["complement_cdf", "before_cdf", "after_cdf"]
    assert sum(n.startswith("chord-") for n in names) == len(plan.targets)


def test_chords_have_slope_alpha_and_end_on_the_cdf(micro):
    supported, model = micro
    plan = _plan(supported, model, 13)
    for name, xs, ys in plot_series(supported, model, plan):
        if name.startswith("chord-") and xs[1] > xs[0]:
            assert (ys[1] - ys[0]) / (xs[1] - xs[0]) == pytest.approx(plan.alpha_final)
            assert ys[1] == model.cdf(xs[1])


def test_svg_is_deterministic(micro, tmp_path):
    supported, model = micro
    plan = _plan(supported, model, 13)
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    render_plan(supported, model, plan, str(first))
    render_plan(supported, model, plan, str(second))
    assert first.read_bytes() == second.read_bytes()


def test_identity_plan_has_no_shaded_area(micro, tmp_path):
    supported, model = micro
    plan = _plan(supported, model, 0)
    svg = tmp_path / "identity.svg"
    render_plan(supported, model, plan, str(svg))
    text = svg.read_text()
    assert "reinforced-area" not in text
    assert 'id="chord-' not in text


def test_worked_example_segments_are_drawn(tmp_path):
    supported = SupportedSet.from_scores(WORKED_SUPPORTED)
    model = EmpiricalComplement(WORKED_COMPLEMENT["120"])
    plan = _plan(supported, model, 181)
    svg, data = tmp_path / "worked.svg", tmp_path / "worked.csv"
    render_plan(supported, model, plan, str(svg), str(data))
    text = svg.read_text()
    assert text.count('id="segment-') == len(plan.segments)
    with open(data) as f:
        rows = list(csv.DictReader(f))
    assert {r["series"] for r in rows} >= {"complement_cdf", "before_cdf", "after_cdf"}


def test_analytic_complement_is_drawn_as_a_curve(tmp_path):
    supported = SupportedSet.from_scores([0.5, 3.0])
    model = LogNormalComplement(0, 1)
    plan = PlanFile.from_plan(iterative_solve(supported, model, 0.2, epsilon=1e-10))
    series = render_plan(supported, model, plan, str(tmp_path / "ln.svg"))
    complement = next(xs for name, xs, _ in series if name == "complement_cdf")
    assert len(complement) == 400
