"""Simulation initialization and exports."""

from src.simulation.simgen import (
    PrbsGenerator,
    Realization,
    RngSpec,
    noise_factor,
    prbs_next,
    simulate_run,
)

__all__ = ["PrbsGenerator", "Realization", "RngSpec", "noise_factor", "prbs_next", "simulate_run"]
