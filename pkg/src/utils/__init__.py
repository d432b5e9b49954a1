"""Utility initialization and exports."""

from src.utils.display import (
    console,
    display_results,
    display_scenario,
    display_settings,
    display_trace,
    display_verify_report,
    export_to_csv,
)

__all__ = [
    "console",
    "display_results",
    "display_scenario",
    "display_settings",
    "display_trace",
    "display_verify_report",
    "export_to_csv",
]
