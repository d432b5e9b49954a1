"""Shared data models for the application."""

import math
from enum import Enum
from pathlib import Path

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)

from src.estimation.matmodel import GaussianStats, StateSpaceModel, WishartStats

Matrix = list[list[float]]


# =============================================================================
# ESTIMATORS
# =============================================================================


class Method(str, Enum):
    """Estimators scored by the experiment harness."""

    IKF = "iKF"
    IFLS = "iFLS"
    KF = "KF"
    FLS = "FLS"
    TFLIS_F = "TFLIS-F"
    TFLIS_S = "TFLIS-S"

    @property
    def column(self) -> str:
        """Suffix used in CSV column names."""
        return self.value.replace("-", "_")

    @property
    def is_smoothing(self) -> bool:
        """Smoothing methods score x_k with data up to k+L."""
        return self in (Method.IFLS, Method.FLS, Method.TFLIS_S)


# =============================================================================
# SCENARIO CONFIGURATION
# =============================================================================


class ModelSpec(BaseModel):
    """Matrices of the state-space model, each an array of rows."""

    model_config = ConfigDict(extra="forbid")

    A: Matrix
    B: Matrix
    C: Matrix
    Q: Matrix
    R: Matrix

    @model_validator(mode="after")
    def _check_model(self) -> "ModelSpec":
        self.to_state_space()
        return self

    def to_state_space(self) -> StateSpaceModel:
        return StateSpaceModel(A=self.A, B=self.B, C=self.C, Q=self.Q, R=self.R)


class ScenarioConfig(BaseModel):
    """Complete description of one Monte Carlo experiment."""

    model_config = ConfigDict(extra="forbid")

    model: ModelSpec
    prior_mean: list[float]
    prior_cov_scale: float | Matrix = Field(description="P_1 = scale * I, or the full matrix")
    sigma0: list[float] = Field(description="Diagonal of the inverse-Wishart scale Σ_0")
    nu0: float = Field(default=0.0, ge=0.0)
    lag: int = Field(ge=0)
    ivb_iterations: int = Field(ge=0)
    horizon: int = Field(ge=1)
    runs: int = Field(ge=1)
    r_E_grid: list[float] = Field(min_length=1)
    master_seed: int = Field(ge=0, lt=2**64)
    methods: list[Method] = Field(default_factory=lambda: list(Method), min_length=1)
    ivb_early_stop: bool = False

    @field_validator("r_E_grid")
    @classmethod
    def _positive_grid(cls, grid: list[float]) -> list[float]:
        for value in grid:
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"r_E values must be finite and > 0, got {value}")
        return grid

    @field_validator("methods")
    @classmethod
    def _unique_methods(cls, methods: list[Method]) -> list[Method]:
        return list(dict.fromkeys(methods))

    @field_validator("sigma0")
    @classmethod
    def _nonnegative_sigma(cls, sigma0: list[float]) -> list[float]:
        if any(not math.isfinite(v) or v < 0 for v in sigma0):
            raise ValueError("sigma0 entries must be finite and >= 0")
        return sigma0

    @model_validator(mode="after")
    def _check_consistency(self) -> "ScenarioConfig":
        model = self.model.to_state_space()
        if self.horizon <= self.lag:
            raise ValueError(f"horizon ({self.horizon}) must exceed lag ({self.lag})")
        if len(self.prior_mean) != model.n_x:
            raise ValueError(f"prior_mean must have {model.n_x} entries")
        if len(self.sigma0) != model.n_y:
            raise ValueError(f"sigma0 must have {model.n_y} entries")
        if isinstance(self.prior_cov_scale, float):
            if not math.isfinite(self.prior_cov_scale) or self.prior_cov_scale <= 0:
                raise ValueError("prior_cov_scale must be > 0")
        else:
            cov = np.asarray(self.prior_cov_scale, dtype=float)
            if cov.shape != (model.n_x, model.n_x):
                raise ValueError(f"prior_cov_scale matrix must be {model.n_x}x{model.n_x}")
            if np.any(np.abs(cov - cov.T) > 1e-12 * np.linalg.norm(cov)):
                raise ValueError("prior_cov_scale matrix must be symmetric")
            if np.min(np.linalg.eigvalsh(cov)) < -1e-12 * np.linalg.norm(cov):
                raise ValueError("prior_cov_scale matrix must be positive semidefinite")
        return self

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ScenarioConfig":
        """Load and validate a scenario from a JSON file."""
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def state_space(self) -> StateSpaceModel:
        return self.model.to_state_space()

    def prior(self) -> GaussianStats:
        """Prior belief N(prior_mean, P_1) over x_1."""
        n_x = len(self.prior_mean)
        if isinstance(self.prior_cov_scale, float):
            cov = self.prior_cov_scale * np.eye(n_x)
        else:
            cov = np.asarray(self.prior_cov_scale, dtype=float)
        return GaussianStats(mean=np.asarray(self.prior_mean, dtype=float), cov=cov)

    def wishart_prior(self) -> WishartStats:
        return WishartStats(sigma=np.asarray(self.sigma0, dtype=float), nu=self.nu0)


# =============================================================================
# VERIFICATION REPORT
# =============================================================================


class SuiteResult(BaseModel):
    """Outcome of one oracle suite."""

    name: str
    passed: bool
    checks: int = 0
    max_error: float | None = None
    tolerance: float | None = None
    detail: str = ""


class VerifyReport(BaseModel):
    """Machine-readable summary of `tflis verify`."""

    suites: list[SuiteResult] = Field(default_factory=list)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(suite.passed for suite in self.suites)

    def to_json(self) -> str:
        """Indented JSON; non-finite errors serialize as null."""
        return self.model_dump_json(indent=2)
