"""Main CLI entry point for the TFLIS experiment harness."""

from pathlib import Path
from typing import Optional

import typer
from pydantic import ValidationError
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
)

from src.config import configure_logging, settings
from src.experiments import load_bundled_scenario, run_sweep, run_trace, run_verify
from src.models import ScenarioConfig
from src.utils import (
    console,
    display_results,
    display_scenario,
    display_settings,
    display_trace,
    display_verify_report,
    export_to_csv,
)

app = typer.Typer(help="Knowledge-transfer fixed-lag interval smoothing experiments")

EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2

CONFIG_HELP = "Scenario JSON file (default: bundled position-velocity scenario)"


def load_scenario(
    path: Optional[Path], seed: Optional[int] = None, runs: Optional[int] = None
) -> ScenarioConfig:
    """Load, override and validate a scenario; exits with status 1 on any error."""
    try:
        config = ScenarioConfig.from_json_file(path) if path else load_bundled_scenario()
        overrides = {}
        if seed is not None:
            overrides["master_seed"] = seed
        if runs is not None:
            overrides["runs"] = runs
        if overrides:
            config = ScenarioConfig.model_validate({**config.model_dump(), **overrides})
    except ValidationError as e:
        console.print(f"[red]Invalid scenario[/red] {path or '(bundled)'}:")
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"]) or "(root)"
            console.print(f"  [bold]{location}[/bold]: {error['msg']}")
        raise typer.Exit(EXIT_INVALID)
    except OSError as e:
        console.print(f"[red]Cannot read scenario:[/red] {e}")
        raise typer.Exit(EXIT_INVALID)
    return config


def resolve_jobs(jobs: Optional[int]) -> int:
    try:
        return settings.resolve_jobs(jobs)
    except ValueError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_INVALID)


def _progress() -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )


@app.command()
def sweep(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV output file (default: stdout)"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes (default: all cores)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the scenario's master seed"),
    runs: Optional[int] = typer.Option(None, "--runs", "-n", help="Override the number of runs per r_E"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress per grid point"),
):
    """
    MSE of every method across the scenario's r_E grid.

    Example:
        tflis sweep --out sweep.csv
        tflis sweep --config my_scenario.json --runs 1000 --jobs 8 --out sweep.csv
    """
    configure_logging("INFO" if verbose else settings.log_level)
    config = load_scenario(config_path, seed, runs)
    workers = resolve_jobs(jobs)

    with _progress() as progress:
        task = progress.add_task("[cyan]Simulating...", total=config.runs * len(config.r_E_grid))
        frame = run_sweep(config, workers, lambda n: progress.advance(task, n))

    export_to_csv(frame, str(out) if out else None)
    display_results(frame, config)


@app.command()
def trace(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    r_E: float = typer.Option(1e-3, "--r-e", help="External observation variance"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV output file (default: stdout)"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes (default: all cores)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the scenario's master seed"),
    runs: Optional[int] = typer.Option(None, "--runs", "-n", help="Override the number of runs"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress"),
):
    """
    Per-step mean SE of every method at a single r_E.

    Example:
        tflis trace --r-e 1e-3 --out trace.csv
    """
    configure_logging("INFO" if verbose else settings.log_level)
    config = load_scenario(config_path, seed, runs)
    workers = resolve_jobs(jobs)
    if not r_E > 0 or r_E == float("inf"):
        console.print(f"[red]Error:[/red] --r-e must be a positive finite number, got {r_E}")
        raise typer.Exit(EXIT_INVALID)

    with _progress() as progress:
        task = progress.add_task("[cyan]Simulating...", total=config.runs)
        frame = run_trace(config, r_E, workers, lambda n: progress.advance(task, n))

    export_to_csv(frame, str(out) if out else None)
    display_trace(frame, config, r_E)


@app.command()
def verify(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log each suite"),
):
    """Run the oracle suites; prints a JSON report and exits with status 2 on failure."""
    configure_logging("INFO" if verbose else settings.log_level)
    with console.status("[cyan]Running oracle suites..."):
        report = run_verify()

    typer.echo(report.to_json())
    display_verify_report(report)
    if not report.passed:
        console.print("[red]✗ Verification failed[/red]")
        raise typer.Exit(EXIT_VERIFY_FAILED)
    console.print("[green]✓[/green] All suites passed")


@app.command()
def show(
    config_path: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes"),
):
    """Show the resolved scenario and runtime settings."""
    config = load_scenario(config_path)
    display_scenario(config, str(config_path) if config_path else "bundled paper.json")
    display_settings(settings, resolve_jobs(jobs))


if __name__ == "__main__":
    app()
