"""Source package initialization."""

from src.config import settings
from src.models import Method, ScenarioConfig, SuiteResult, VerifyReport

__all__ = ["settings", "Method", "ScenarioConfig", "SuiteResult", "VerifyReport"]
