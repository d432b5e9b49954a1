"""Console tables and CSV export for experiment results."""

import sys

import numpy as np
import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from src.config import Settings
from src.models import ScenarioConfig, VerifyReport

# Status output goes to stderr so CSV / JSON on stdout stays machine-readable
console = Console(stderr=True)

CSV_FLOAT_FORMAT = "%.12g"


def display_results(frame: pd.DataFrame, config: ScenarioConfig):
    """Display sweep MSEs (mean ± standard error) with the best method per row highlighted."""

    console.print(
        Panel.fit(
            f"[bold cyan]MSE sweep[/bold cyan]\n"
            f"{config.runs} runs per r_E, horizon {config.horizon}, lag {config.lag}, "
            f"N = {config.ivb_iterations}",
            border_style="cyan",
        )
    )

    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("r_E", style="cyan", justify="right")
    for method in config.methods:
        table.add_column(method.value, justify="right")

    for _, row in frame.iterrows():
        means = {m: row[f"mse_{m.column}"] for m in config.methods}
        best = min(means, key=means.get)
        cells = [f"{row['r_E']:.0e}"]
        for method in config.methods:
            text = f"{means[method]:.3e} ± {row[f'se_{method.column}']:.1e}"
            cells.append(f"[green]{text}[/green]" if method is best else text)
        table.add_row(*cells)

    console.print(table)


def display_trace(frame: pd.DataFrame, config: ScenarioConfig, r_E: float, every: int = 5):
    """Display a thinned view of the per-step mean SE."""
    table = Table(
        title=f"Mean SE_k at r_E = {r_E:g} ({config.runs} runs)",
        show_header=True,
        header_style="bold magenta",
    )
    table.add_column("k", style="dim", justify="right")
    for method in config.methods:
        table.add_column(method.value, justify="right")

    for _, row in frame.iterrows():
        k = int(row["k"])
        if k != 1 and k % every and k != len(frame):
            continue
        table.add_row(str(k), *(f"{row[f'se_{m.column}']:.3e}" for m in config.methods))
    console.print(table)


def display_scenario(config: ScenarioConfig, source: str):
    """Display a resolved scenario."""
    model = config.state_space()
    console.print(f"\n[bold]Scenario:[/bold] {source}\n")

    table = Table(show_header=False, box=None, padding=(0, 2))
    table.add_column("Field", style="bold")
    table.add_column("Value")
    for name in ("A", "B", "C", "Q", "R"):
        table.add_row(name, np.array2string(getattr(model, name), precision=6))
    table.add_row("prior_mean", str(config.prior_mean))
    table.add_row("prior_cov_scale", str(config.prior_cov_scale))
    table.add_row("sigma0 / nu0", f"{config.sigma0} / {config.nu0}")
    table.add_row("lag", str(config.lag))
    table.add_row("ivb_iterations", str(config.ivb_iterations))
    table.add_row("ivb_early_stop", str(config.ivb_early_stop))
    table.add_row("horizon", str(config.horizon))
    table.add_row("runs", str(config.runs))
    table.add_row("r_E_grid", ", ".join(f"{r:g}" for r in config.r_E_grid))
    table.add_row("master_seed", str(config.master_seed))
    table.add_row("methods", ", ".join(m.value for m in config.methods))
    console.print(table)


def display_settings(settings: Settings, jobs: int):
    """Display runtime settings."""
    console.print("\n[bold]Runtime settings:[/bold]\n")
    console.print(f"  Workers: {jobs}" + ("" if settings.jobs else " [dim](all cores)[/dim]"))
    console.print(f"  Log level: {settings.log_level}")
    console.print(f"  Verify instances: {settings.verify_instances}")
    console.print(f"  Verify seed: {settings.verify_seed}")
    console.print(f"  IVB early-stop tolerance: {settings.ivb_tolerance:g}")
    console.print()


def display_verify_report(report: VerifyReport):
    """Display oracle suite outcomes."""
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Suite", style="bold")
    table.add_column("Result")
    table.add_column("Checks", justify="right")
    table.add_column("Max error", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Detail")

    for suite in report.suites:
        table.add_row(
            suite.name,
            "[green]pass[/green]" if suite.passed else "[red]FAIL[/red]",
            str(suite.checks),
            "" if suite.max_error is None else f"{suite.max_error:.2e}",
            "" if suite.tolerance is None else f"{suite.tolerance:.0e}",
            suite.detail[:80],
        )
    console.print(table)


def export_to_csv(frame: pd.DataFrame, filename: str | None = None):
    """Write a result frame as CSV (stdout when no filename is given)."""
    target = sys.stdout if filename is None else filename
    frame.to_csv(
        target,
        index=False,
        float_format=CSV_FLOAT_FORMAT,
        na_rep="",
        lineterminator="\n",
    )
    if filename is not None:
        console.print(f"[green]✓[/green] Results exported to {filename}")
