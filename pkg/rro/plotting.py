"""
Renders a solved plan in the stacked-c.d.f. style: the complement's c.d.f.
with one chord line per target on top, the principal's c.d.f. before and
after reinforcement below, with the reinforced area shaded.
"""
import csv
import logging
from typing import Iterable, List, Optional, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .config import settings  # noqa: E402
from .schemas import PlanFile  # noqa: E402
from .score_model import ComplementModel, EmpiricalComplement, SupportedSet  # noqa: E402

logger = logging.getLogger(__name__)

Series = Tuple[str, np.ndarray, np.ndarray]


def _step_series(scores: np.ndarray, x_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """Vertices of a right-continuous empirical c.d.f. drawn with where='post'."""
    values, counts = np.unique(scores, return_counts=True)
    xs = np.concatenate(([0.0], values, [x_max]))
    fs = np.concatenate(([0.0], np.cumsum(counts) / scores.size, [1.0]))
    return xs, fs


def plot_series(supported: SupportedSet, model: ComplementModel, plan: PlanFile) -> List[Series]:
    """Every curve that goes into the figure, also written to the companion CSV."""
    after = np.sort(np.array([row.to for row in plan.assignments]))
    top = max(float(after.max()), float(supported.scores.max()))
    if isinstance(model, EmpiricalComplement):
        top = max(top, float(model.scores.max()))
    x_max = 1.1 * top

    series: List[Series] = []
    if isinstance(model, EmpiricalComplement):
        xs, fs = _step_series(model.scores, x_max)
    else:
        xs = np.linspace(0.0, x_max, 400)
        fs = np.asarray(model.cdf(xs))
    series.append(("complement_cdf", xs, fs))
    series.append(("before_cdf",) + _step_series(supported.scores, x_max))
    series.append(("after_cdf",) + _step_series(after, x_max))

    alpha = plan.alpha_final
    if alpha is not None:
        lows = {seg.high: seg.low for seg in plan.segments}
        for i, y in enumerate(plan.targets):
            low = lows.get(y, y)
            fy = float(model.cdf(y))
            line_x = np.array([low, y])
            series.append((f"chord-{i}", line_x, fy + alpha * (line_x - y)))
    return series


def write_series_csv(series: Iterable[Series], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["series", "x", "y"])
        for name, xs, ys in series:
            for x, y in zip(xs, ys):
                writer.writerow([name, repr(float(x)), repr(float(y))])


def render_plan(supported: SupportedSet, model: ComplementModel, plan: PlanFile,
                svg_path: str, csv_path: Optional[str] = None) -> List[Series]:
    """
    Writes a deterministic SVG of the plan (and the plotted data as CSV).

    Returns:
        The plotted series.
    """
    style = settings.plot
    plt.rcParams["svg.hashsalt"] = style.svg_hashsalt
    series = plot_series(supported, model, plan)
    by_name = {name: (xs, ys) for name, xs, ys in series}

    fig, (ax_c, ax_a) = plt.subplots(
        2, 1, sharex=True, figsize=(style.width_px / 100.0, style.height_px / 100.0), dpi=100
    )
    xs, fs = by_name["complement_cdf"]
    if isinstance(model, EmpiricalComplement):
        ax_c.step(xs, fs, where="post", color=style.complement_color, label="complement")
    else:
        ax_c.plot(xs, fs, color=style.complement_color, label="complement")
    for name, line_x, line_y in series:
        if name.startswith("chord-"):
            (line,) = ax_c.plot(line_x, line_y, color=style.chord_color, linewidth=1.2)
            line.set_gid(name)
    for i, seg in enumerate(plan.segments):
        span = ax_c.axvspan(seg.low, seg.high, color=style.chord_color, alpha=0.08)
        span.set_gid(f"segment-{i}")
    ax_c.set_ylabel("F_c")
    ax_c.set_ylim(-0.02, 1.02)
    ax_c.legend(loc="lower right")

    bx, bf = by_name["before_cdf"]
    axx, af = by_name["after_cdf"]
    ax_a.step(bx, bf, where="post", color=style.base_color, label="before")
    ax_a.step(axx, af, where="post", color=style.reinforced_color, label="after")
    if plan.budget_used > 0:
        grid = np.union1d(bx, axx)
        before = np.searchsorted(np.sort(supported.scores), grid, side="right") / supported.n
        after_scores = np.sort(np.array([row.to for row in plan.assignments]))
        after = np.searchsorted(after_scores, grid, side="right") / after_scores.size
        area = ax_a.fill_between(grid, after, before, where=before > after, step="post",
                                 color=style.reinforced_color, alpha=0.25)
        area.set_gid("reinforced-area")
    ax_a.set_xlabel("score")
    ax_a.set_ylabel("F_a / F_A")
    ax_a.set_xlim(0.0, float(xs[-1]))
    ax_a.set_ylim(-0.02, 1.02)
    ax_a.legend(loc="lower right")

    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("Plot written to %s", svg_path)

    if csv_path:
        write_series_csv(series, csv_path)
    return series
