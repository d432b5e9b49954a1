"""Scoring initialization and exports."""

from src.scoring.metrics import MethodScorer, aggregate, create_scorer, mse, se

__all__ = ["MethodScorer", "aggregate", "create_scorer", "mse", "se"]
