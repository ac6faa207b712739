import click
import logging
import os
import sys

# Ensure the project root is in the Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from rro.config import settings, reload_settings
from rro.errors import InvariantViolation, ReinforcementError
from rro.schemas import load_instance, load_plan
from rro.tasks import oracle_task, plot_task, solve_task, sweep_task, utility_task, write_sweep_csv

EXIT_VALIDATION = 2
EXIT_INVARIANT = 3


def _fail(message, code):
    click.secho(message, fg="red", err=True)
    sys.exit(code)


def _read(path):
    with open(path, "r") as f:
        return f.read()


def _run(action):
    """Runs a command body, mapping failures onto the documented exit codes."""
    try:
        return action()
    except InvariantViolation as e:
        _fail(f"Internal invariant violated: {e}", EXIT_INVARIANT)
    except (ReinforcementError, ValueError) as e:
        # pydantic.ValidationError and json errors are ValueErrors
        _fail(f"Error: {e}", EXIT_VALIDATION)


def _emit(text, out):
    if out:
        with open(out, "w") as f:
            f.write(text)
        click.secho(f"Written to {out}", fg="green", err=True)
    else:
        click.echo(text)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="YAML configuration file (defaults to ./config.yml when present).")
@click.option("--verbose", is_flag=True, help="Log every search step.")
def cli(config_path, verbose):
    """
    Rank Reinforcement Optimizer (RRO) Command-Line Interface.

    Spends a score budget on a principal's entries so that they outrank as
    much of the competing field as possible.
    """
    if config_path:
        try:
            reload_settings(config_path)
        except ValueError as e:
            _fail(f"Error: Could not load configuration from '{config_path}': {e}", EXIT_VALIDATION)
    level = logging.DEBUG if verbose else getattr(logging, settings.logging.level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=settings.logging.format, stream=sys.stderr)
    logging.getLogger().setLevel(level)


@cli.command("solve")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Instance JSON file.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Plan JSON file (stdout if omitted).")
@click.option("--epsilon", type=float, default=None, help="Stopping width of the gradient search.")
@click.option("--fastpath", is_flag=True, help="Use the unimodal fast path (analytic unimodal complements only).")
def solve_command(in_path, out_path, epsilon, fastpath):
    """
    Solves an instance and writes the reinforcement plan.
    """
    def action():
        instance = load_instance(_read(in_path))
        return solve_task(instance, epsilon=epsilon, fastpath=fastpath)

    plan = _run(action)
    _emit(plan.to_json(), out_path)


@cli.command("sweep")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Instance JSON file.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="CSV file (stdout if omitted).")
@click.option("--alpha-min", type=float, required=True)
@click.option("--alpha-max", type=float, required=True)
@click.option("--steps", type=int, default=100, show_default=True)
def sweep_command(in_path, out_path, alpha_min, alpha_max, steps):
    """
    Tabulates budget used, next gradient and utility over log-spaced gradients.
    """
    def action():
        instance = load_instance(_read(in_path))
        return sweep_task(instance, alpha_min, alpha_max, steps)

    rows = _run(action)
    if out_path:
        with open(out_path, "w", newline="") as f:
            write_sweep_csv(rows, f)
        click.secho(f"{len(rows)} rows written to {out_path}", fg="green", err=True)
    else:
        write_sweep_csv(rows, click.get_text_stream("stdout"))


@cli.command("plot")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Instance JSON file.")
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Plan JSON file.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="SVG file.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False),
              help="Series CSV (defaults to the SVG path with a .csv suffix).")
def plot_command(in_path, plan_path, out_path, csv_path):
    """
    Renders the complement c.d.f. with its chord lines above the principal's
    c.d.f. before and after reinforcement.
    """
    csv_path = csv_path or os.path.splitext(out_path)[0] + ".csv"

    def action():
        instance = load_instance(_read(in_path))
        plan = load_plan(_read(plan_path))
        return plot_task(instance, plan, out_path, csv_path)

    chords = _run(action)
    click.secho(f"Plot with {chords} chord line(s) written to {out_path} (data in {csv_path})", fg="green")


@cli.command("oracle")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Instance JSON file.")
def oracle_command(in_path):
    """
    Brute-forces a small empirical instance and prints every optimal plan.
    """
    def action():
        return oracle_task(load_instance(_read(in_path)))

    result = _run(action)
    click.echo(f"best utility: {result.best_utility}")
    click.echo(f"assignments explored: {result.explored}")
    for i, plan in enumerate(result.best_plans):
        moves = ", ".join(f"{a:g}->{b:g}" for a, b in plan.pairs())
        click.echo(f"  - Plan #{i + 1} (cost {plan.cost:g}): {moves}")


@cli.command("utility")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Instance JSON file.")
@click.option("--plan", "plan_path", type=click.Path(exists=True, dir_okay=False),
              help="Evaluate the plan's reinforced scores instead of the supported scores.")
def utility_command(in_path, plan_path):
    """
    Prints the utility of the supported scores (or of a plan) against the complement.
    """
    def action():
        instance = load_instance(_read(in_path))
        plan = load_plan(_read(plan_path)) if plan_path else None
        return utility_task(instance, plan)

    report = _run(action)
    click.echo(f"utility: {report.utility!r}")
    if report.exact is not None:
        click.echo(f"exact: {report.exact}")


@cli.command("check-config")
def check_config_command():
    """
    Displays the effective configuration.

    This is useful for verifying that 'config.yml' (or the file passed with
    --config) is being read correctly.
    """
    config = settings
    click.secho("Configuration loaded successfully!", fg="green")
    click.echo("---")
    click.echo(f"Collinear tolerance: {config.solver.collinear_tolerance}")
    click.echo(f"Budget tolerance: {config.solver.budget_tolerance}")
    click.echo(f"Search iteration cap: {config.solver.max_search_iterations}")
    click.echo(f"Knapsack enumeration limit: {config.solver.knapsack_enumeration_limit}")
    click.echo(f"Exact completion cells: {config.solver.exact_completion_cells}")
    click.echo(f"Oracle guard: n <= {config.oracle.max_supported}, m <= {config.oracle.max_complement}")
    click.echo(f"Plot canvas: {config.plot.width_px}x{config.plot.height_px}")
    click.echo(f"Log level: {config.logging.level}")
    click.echo("---")


if __name__ == '__main__':
    cli()
