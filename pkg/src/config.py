"""Configuration management using Pydantic settings."""

import logging
import os

from pydantic_settings import BaseSettings, SettingsConfigDict
from rich.console import Console
from rich.logging import RichHandler


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables (prefix ``TFLIS_``)."""

    model_config = SettingsConfigDict(
        env_prefix="TFLIS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Worker pool
    jobs: int | None = None  # None -> all available cores

    # Console / logging
    log_level: str = "WARNING"

    # Oracle suites run by `tflis verify`
    verify_instances: int = 200
    verify_seed: int = 20240917

    # IVB early stop threshold (only used when a scenario enables early stopping)
    ivb_tolerance: float = 1e-12

    def resolve_jobs(self, override: int | None = None) -> int:
        """Determine the worker count, honouring a CLI override."""
        jobs = override if override is not None else self.jobs
        if jobs is None:
            return os.cpu_count() or 1
        if jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {jobs}")
        return jobs


def configure_logging(level: str | int = "WARNING") -> None:
    """Route library logging through rich on stderr."""
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    logging.basicConfig(
        level=level.upper() if isinstance(level, str) else level,
        format="%(name)s: %(message)s",
        datefmt="[%X]",
        handlers=[handler],
        force=True,
    )


# Global settings instance
settings = Settings()
