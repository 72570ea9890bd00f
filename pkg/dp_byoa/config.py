"""Configuration management for dp-byoa: environment defaults and experiment files."""

import logging
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ArgumentError, ConfigError
from .privacy.mechanisms import PrivacyBudget
from .problems.families import BilinearFamily, LogisticFamily, ProblemFamily, QuadraticFamily
from .solvers.base import MinimaxSolverKind, MinimaxSolverSpec, MinSolverKind, MinSolverSpec


logger = logging.getLogger(__name__)


class DpByoaSettings(BaseSettings):
    """Process-wide defaults, read from DP_BYOA_* variables and .env."""

    log_level: str = Field(default="INFO", description="Logging level")
    jobs: int = Field(default=1, ge=1, description="Worker processes for sweeps")
    output_dir: str = Field(default="runs", description="Default artifact directory")
    quick: bool = Field(default=False, description="Halve trial counts in probes and verify")

    model_config = SettingsConfigDict(
        env_prefix="DP_BYOA_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class ExperimentKind(str, Enum):
    """What a config asks the CLI to do."""
    SC_MIN = "sc_min"
    CONVEX_MIN_PHASED = "convex_min_phased"
    SCSC_SADDLE = "scsc_saddle"
    CC_SADDLE = "cc_saddle"
    CSC_SADDLE = "csc_saddle"
    STABILITY_PROBE = "stability_probe"
    UTILITY_SWEEP = "utility_sweep"


ALGORITHM_KINDS = (
    ExperimentKind.SC_MIN,
    ExperimentKind.CONVEX_MIN_PHASED,
    ExperimentKind.SCSC_SADDLE,
    ExperimentKind.CC_SADDLE,
    ExperimentKind.CSC_SADDLE,
)
MINIMAX_KINDS = (ExperimentKind.SCSC_SADDLE, ExperimentKind.CC_SADDLE, ExperimentKind.CSC_SADDLE)


class FamilyKind(str, Enum):
    """Synthetic problem families."""
    QUADRATIC = "quadratic"
    LOGISTIC = "logistic"
    BILINEAR = "bilinear"


class ProbeTarget(str, Enum):
    """Which stability property a probe measures."""
    MIN = "min"
    MINIMAX = "minimax"
    PROX = "prox"
    GAP_SANDWICH = "gap_sandwich"


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ProblemConfig(BaseModel):
    """Problem family and its parameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    family: FamilyKind = Field(default=FamilyKind.QUADRATIC, description="Synthetic family")
    n: int = Field(default=64, ge=1, description="Training set size")
    dim: int = Field(default=2, ge=1, description="Dimension d (d_x for saddles)")
    dim_y: Optional[int] = Field(default=None, ge=1, description="d_y; defaults to dim")
    mu: float = Field(default=1.0, gt=0, description="Quadratic curvature")
    mu_x: float = Field(default=1.0, ge=0, description="Bilinear strong convexity in x")
    mu_y: float = Field(default=1.0, ge=0, description="Bilinear strong concavity in y")
    ridge: float = Field(default=0.0, ge=0, description="Logistic ridge modulus")
    spread: float = Field(default=1.0, ge=0, description="Quadratic data radius around the mean")
    feature_radius: float = Field(default=1.0, gt=0, description="Logistic feature radius")
    label_noise: float = Field(default=0.1, ge=0, lt=0.5)
    noise_scale: float = Field(default=0.1, ge=0, description="Bilinear entrywise noise")
    matrix_scale: float = Field(default=0.5, ge=0, description="Scale of the bilinear means")
    domain_radius: float = Field(default=2.0, gt=0, description="Radius D of every domain")
    family_seed: int = Field(default=0, ge=0, description="Seed of the bilinear population means")
    holdout_factor: int = Field(default=10, ge=1, description="Holdout size as a multiple of n")

    def build_family(self) -> ProblemFamily:
        """Instantiate the configured family."""
        if self.family is FamilyKind.QUADRATIC:
            return QuadraticFamily(
                dim=self.dim, mu=self.mu, spread=self.spread, domain_radius=self.domain_radius
            )
        if self.family is FamilyKind.LOGISTIC:
            return LogisticFamily(
                dim=self.dim,
                ridge=self.ridge,
                feature_radius=self.feature_radius,
                label_noise=self.label_noise,
                domain_radius=self.domain_radius,
            )
        return BilinearFamily.random(
            self.dim,
            self.dim_y or self.dim,
            np.random.default_rng(self.family_seed),
            mu_x=self.mu_x,
            mu_y=self.mu_y,
            noise_scale=self.noise_scale,
            scale=self.matrix_scale,
            domain_radius=self.domain_radius,
        )


class PrivacyConfig(BaseModel):
    """Target (epsilon, delta); delta defaults to 1/(2n)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float = Field(default=0.5, gt=0, description="Privacy loss epsilon")
    delta: Optional[float] = Field(default=None, gt=0, lt=1, description="Failure probability")

    def budget(self, n: int) -> PrivacyBudget:
        return PrivacyBudget(epsilon=self.epsilon, delta=self.delta or 1.0 / (2.0 * n))


class SolverConfig(BaseModel):
    """Base solver choice shared by every run of a config."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    min_kind: MinSolverKind = Field(default=MinSolverKind.SVRG)
    minimax_kind: MinimaxSolverKind = Field(default=MinimaxSolverKind.EXTRAGRADIENT)
    step_size: Optional[float] = Field(default=None, gt=0)
    budget_constant: Optional[float] = Field(default=None, gt=0)
    max_gradient_evals: Optional[int] = Field(default=None, gt=0)

    def _overrides(self) -> dict[str, Any]:
        values = {
            "step_size": self.step_size,
            "budget_constant": self.budget_constant,
            "max_gradient_evals": self.max_gradient_evals,
        }
        return {key: value for key, value in values.items() if value is not None}

    def min_spec(self) -> MinSolverSpec:
        return MinSolverSpec(kind=self.min_kind, **self._overrides())

    def minimax_spec(self) -> MinimaxSolverSpec:
        return MinimaxSolverSpec(kind=self.minimax_kind, **self._overrides())


class SweepConfig(BaseModel):
    """Grid of a utility sweep."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    algorithm: ExperimentKind = Field(default=ExperimentKind.CONVEX_MIN_PHASED)
    ns: list[int] = Field(default_factory=lambda: [64, 128, 256], description="Sample sizes")
    epsilons: list[float] = Field(default_factory=lambda: [0.5], description="Epsilon values")
    repetitions: int = Field(default=30, ge=1, description="Seeds per grid point")

    @field_validator("ns", "epsilons", mode="before")
    @classmethod
    def split_lists(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("ns")
    @classmethod
    def check_ns(cls, value: list[int]) -> list[int]:
        if not value or any(n < 1 for n in value):
            raise ValueError("ns must be a non-empty list of positive integers")
        return value

    @field_validator("epsilons")
    @classmethod
    def check_epsilons(cls, value: list[float]) -> list[float]:
        if not value or any(eps <= 0 for eps in value):
            raise ValueError("epsilons must be a non-empty list of positive numbers")
        return value


class ProbeConfig(BaseModel):
    """Stability probe settings."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    target: ProbeTarget = Field(default=ProbeTarget.MIN)
    ns: list[int] = Field(default_factory=lambda: [25, 50, 100])
    trials: int = Field(default=200, ge=1, description="Neighbouring pairs per n")
    reg_mu: Optional[float] = Field(
        default=None, gt=0, description="Modulus of an anchored regularizer added to each solve"
    )

    @field_validator("ns", mode="before")
    @classmethod
    def split_ns(cls, value: Any) -> Any:
        return _split_list(value)


class RunConfig(BaseModel):
    """One experiment file."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ExperimentKind = Field(description="Experiment to run")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Root seed")
    output_dir: str = Field(default="runs", description="Artifact directory")
    repetitions: int = Field(default=1, ge=1, description="Independent runs of an algorithm")
    mu: Optional[float] = Field(default=None, gt=0, description="Base regularization override")
    no_noise: bool = Field(default=False, description="Testing only: disable all noise")
    problem: ProblemConfig = Field(default_factory=ProblemConfig)
    privacy: PrivacyConfig = Field(default_factory=PrivacyConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    probe: ProbeConfig = Field(default_factory=ProbeConfig)

    @model_validator(mode="after")
    def check_pairing(self) -> "RunConfig":
        family = self.problem.family
        if self.kind is ExperimentKind.UTILITY_SWEEP:
            kind = self.sweep.algorithm
            if kind not in ALGORITHM_KINDS:
                raise ConfigError(f"Cannot sweep '{kind.value}'", field="sweep.algorithm")
        else:
            kind = self.kind

        if kind in ALGORITHM_KINDS:
            wants_saddle = kind in MINIMAX_KINDS
            if wants_saddle != (family is FamilyKind.BILINEAR):
                raise ConfigError(
                    f"Family '{family.value}' is not supported by '{kind.value}'",
                    field="problem.family",
                )
            if (
                kind is ExperimentKind.SC_MIN
                and family is FamilyKind.LOGISTIC
                and self.problem.ridge <= 0
            ):
                raise ConfigError("sc_min needs a strongly convex problem", field="problem.ridge")
            ns = self.sweep.ns if self.kind is ExperimentKind.UTILITY_SWEEP else [self.problem.n]
            epsilons = (
                self.sweep.epsilons
                if self.kind is ExperimentKind.UTILITY_SWEEP
                else [self.privacy.epsilon]
            )
            for n in ns:
                for eps in epsilons:
                    budget = PrivacyConfig(epsilon=eps, delta=self.privacy.delta).budget(n)
                    try:
                        budget.check_regime(n)
                    except ArgumentError as e:
                        field = "privacy.delta" if "delta" in str(e) else "privacy.epsilon"
                        raise ConfigError(f"{e}; delta must lie in (0, 1/n)", field=field) from e
        else:
            target = self.probe.target
            needs = FamilyKind.QUADRATIC if target is ProbeTarget.MIN else FamilyKind.BILINEAR
            if family is not needs:
                raise ConfigError(
                    f"Probe '{target.value}' needs the {needs.value} family",
                    field="problem.family",
                )
        return self


_SECTIONS = ("problem", "privacy", "solver", "sweep", "probe")


def _parse_lines(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    values: dict[str, Any] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"Expected 'key = value', got '{line}'", line=lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError("Missing key", line=lineno)
        if key in lines:
            raise ConfigError(f"Duplicate key '{key}'", line=lineno, field=key)
        lines[key] = lineno

        section, _, name = key.partition(".")
        if name:
            if section not in _SECTIONS or "." in name:
                raise ConfigError(f"Unknown section in '{key}'", line=lineno, field=key)
            values.setdefault(section, {})[name] = value
        else:
            if key in _SECTIONS:
                raise ConfigError(f"'{key}' is a section, not a key", line=lineno, field=key)
            values[key] = value
    return values, lines


def _line_for(field: Optional[str], lines: dict[str, int]) -> Optional[int]:
    if field is None:
        return None
    if field in lines:
        return lines[field]
    prefix = field.split(".")[0]
    nested = [line for key, line in lines.items() if key.startswith(prefix + ".")]
    return min(nested) if nested else None


def parse_config_text(text: str) -> RunConfig:
    """
    Parse the flat `key = value` experiment format.

    Keys use dotted sections (`problem.n = 64`); `#` starts a comment line;
    list values are comma separated.

    Raises:
        ConfigError: With the offending line and field on any parse or validation failure
    """
    values, lines = _parse_lines(text)
    try:
        return RunConfig.model_validate(values)
    except ConfigError as e:
        raise ConfigError(e.message, line=_line_for(e.field, lines), field=e.field) from e
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or None
        raise ConfigError(error["msg"], line=_line_for(field, lines), field=field) from e


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate an experiment file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    config = parse_config_text(text)
    logger.info(f"Loaded {config.kind.value} config from {path}")
    return config


def _format_value(value: Any) -> str:
    if isinstance(value, list):
        return ", ".join(_format_value(item) for item in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: RunConfig) -> str:
    """Write a config in the format parse_config_text reads; round-trips exactly."""
    data = config.model_dump(mode="json", exclude_none=True)
    out = []
    for key, value in data.items():
        if key not in _SECTIONS:
            out.append(f"{key} = {_format_value(value)}")
    for section in _SECTIONS:
        out.append("")
        for key, value in data[section].items():
            out.append(f"{section}.{key} = {_format_value(value)}")
    return "\n".join(out) + "\n"
