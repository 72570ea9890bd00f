"""Routing of validated experiment configs to their runners."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel

from ..config import ALGORITHM_KINDS, ExperimentKind, ProbeTarget, RunConfig
from ..evaluation.risk import gap_sandwich_probe
from ..evaluation.stability import (
    InequalityReport,
    StabilityReport,
    prox_nonexpansiveness_probe,
    stability_probe_min,
    stability_probe_minimax,
)
from ..evaluation.sweep import RunOutcome, UtilityRecord, run_algorithm, utility_sweep
from ..exceptions import ConfigError
from ..privacy.streams import RandomStreams
from ..problems.base import MinimaxProblem


logger = logging.getLogger(__name__)


class Subcommand(str, Enum):
    """CLI subcommands that take a config file."""
    RUN = "run"
    SWEEP = "sweep"
    PROBE = "probe"


class ProbeRecord(BaseModel):
    """One row of probes.csv."""

    target: str
    check: str
    n: int
    trials: int
    violations: int
    worst: float
    bound: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.violations == 0


@dataclass
class ExperimentResult:
    """Everything an experiment produced, ready for the artifact writer."""

    kind: ExperimentKind
    config: RunConfig
    outcomes: list[RunOutcome] = field(default_factory=list)
    records: list[UtilityRecord] = field(default_factory=list)
    probes: list[ProbeRecord] = field(default_factory=list)

    @property
    def failed_probes(self) -> list[ProbeRecord]:
        return [probe for probe in self.probes if not probe.ok]

    @property
    def ok(self) -> bool:
        return not self.failed_probes


class ExperimentRouter:
    """
    Router that checks which subcommand may run a config and dispatches it.

    Seeds, the no-noise switch and the quick mode are applied here so that every
    runner sees one fully resolved RunConfig.
    """

    # Kinds each subcommand accepts
    SUBCOMMAND_KINDS = {
        Subcommand.RUN: ALGORITHM_KINDS,
        Subcommand.SWEEP: (ExperimentKind.UTILITY_SWEEP,),
        Subcommand.PROBE: (ExperimentKind.STABILITY_PROBE,),
    }

    def __init__(
        self,
        jobs: int = 1,
        quick: bool = False,
        seed: Optional[int] = None,
        no_noise: bool = False,
    ):
        """
        Initialize the router.

        Args:
            jobs: Worker processes for sweeps
            quick: Halve trial and repetition counts
            seed: Root seed overriding the config's
            no_noise: Testing only; disable noise in every run
        """
        self.jobs = jobs
        self.quick = quick
        self.seed = seed
        self.no_noise = no_noise
        self._handlers: dict[ExperimentKind, Callable[[RunConfig], ExperimentResult]] = {
            kind: self._run_algorithm for kind in ALGORITHM_KINDS
        }
        self._handlers[ExperimentKind.UTILITY_SWEEP] = self._run_sweep
        self._handlers[ExperimentKind.STABILITY_PROBE] = self._run_probe

    def resolve(self, subcommand: Subcommand, config: RunConfig) -> RunConfig:
        """
        Validate the subcommand/kind pairing and apply the router's overrides.

        Raises:
            ConfigError: If the subcommand does not accept the config's kind
        """
        accepted = self.SUBCOMMAND_KINDS[subcommand]
        if config.kind not in accepted:
            names = ", ".join(kind.value for kind in accepted)
            raise ConfigError(
                f"'{subcommand.value}' runs {names}, not '{config.kind.value}'", field="kind"
            )
        updates: dict = {}
        if self.seed is not None:
            updates["seed"] = self.seed
        if self.no_noise:
            updates["no_noise"] = True
        return config.model_copy(update=updates) if updates else config

    def route(self, subcommand: Subcommand, config: RunConfig) -> ExperimentResult:
        """
        Run a config under a subcommand.

        Args:
            subcommand: The CLI subcommand
            config: Parsed and validated config

        Returns:
            ExperimentResult of the runner
        """
        config = self.resolve(subcommand, config)
        logger.info(f"Routing {config.kind.value} (seed {config.seed}) to '{subcommand.value}'")
        return self._handlers[config.kind](config)

    def explain(self, config: RunConfig) -> str:
        """Human-readable description of what a config will do."""
        lines = [f"Experiment: {config.kind.value} (seed {config.seed})"]
        lines.append(f"Family: {config.problem.family.value}, n={config.problem.n}")
        if config.kind in ALGORITHM_KINDS:
            lines.append(f"Runs: {self._repetitions(config.repetitions)}")
            lines.append(f"Privacy: epsilon={config.privacy.epsilon:g}")
        elif config.kind is ExperimentKind.UTILITY_SWEEP:
            sweep = config.sweep
            lines.append(
                f"Sweep: {sweep.algorithm.value} over n={sweep.ns}, epsilon={sweep.epsilons}, "
                f"{self._repetitions(sweep.repetitions)} seeds each"
            )
        else:
            probe = config.probe
            lines.append(
                f"Probe: {probe.target.value} over n={probe.ns}, "
                f"{self._trials(probe.trials)} trials each"
            )
        if config.no_noise or self.no_noise:
            lines.append("NO-NOISE MODE: outputs are not private")
        return "\n".join(lines) + "\n"

    def _repetitions(self, count: int) -> int:
        return max(1, count // 2) if self.quick else count

    def _trials(self, count: int) -> int:
        return max(1, count // 2) if self.quick else count

    def _run_algorithm(self, config: RunConfig) -> ExperimentResult:
        root = RandomStreams(config.seed)
        result = ExperimentResult(kind=config.kind, config=config)
        for r in range(self._repetitions(config.repetitions)):
            outcome = run_algorithm(config, root.seed("repetition", r), r)
            result.outcomes.append(outcome)
            result.records.append(outcome.record)
        return result

    def _run_sweep(self, config: RunConfig) -> ExperimentResult:
        records = utility_sweep(
            config, jobs=self.jobs, repetitions=self._repetitions(config.sweep.repetitions)
        )
        failed = sum(record.error is not None for record in records)
        if failed:
            logger.warning(f"{failed} of {len(records)} sweep runs failed")
        return ExperimentResult(kind=config.kind, config=config, records=records)

    def _run_probe(self, config: RunConfig) -> ExperimentResult:
        probe = config.probe
        family = config.problem.build_family()
        streams = RandomStreams(config.seed)
        trials = self._trials(probe.trials)
        result = ExperimentResult(kind=config.kind, config=config)
        for n in probe.ns:
            rng = streams.stream("probe", probe.target.value, n)
            if probe.target is ProbeTarget.MIN:
                report = stability_probe_min(family, n, trials, rng, probe.reg_mu)
                result.probes.append(_stability_row(probe.target, report))
            elif probe.target is ProbeTarget.MINIMAX:
                report = stability_probe_minimax(family, n, trials, rng, probe.reg_mu)
                result.probes.append(_stability_row(probe.target, report))
            else:
                problem = family.make_problem(family.sample(n, rng))
                assert isinstance(problem, MinimaxProblem)
                if probe.target is ProbeTarget.PROX:
                    modulus = probe.reg_mu or 1.0
                    reports = [prox_nonexpansiveness_probe(problem, trials, rng, modulus, modulus)]
                else:
                    reports = list(gap_sandwich_probe(problem, trials, rng))
                result.probes.extend(_inequality_row(probe.target, n, r) for r in reports)
        return result


def _stability_row(target: ProbeTarget, report: StabilityReport) -> ProbeRecord:
    return ProbeRecord(
        target=target.value,
        check="stability",
        n=report.n,
        trials=report.trials,
        violations=report.violations,
        worst=report.max_shift,
        bound=report.bound,
    )


def _inequality_row(target: ProbeTarget, n: int, report: InequalityReport) -> ProbeRecord:
    worst = report.worst_margin if np.isfinite(report.worst_margin) else 0.0
    return ProbeRecord(
        target=target.value,
        check=report.name,
        n=n,
        trials=report.trials,
        violations=report.violations,
        worst=worst,
    )
