"""Single evaluated runs, utility sweeps over (n, epsilon) and their aggregation."""

import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator

from ..config import MINIMAX_KINDS, ExperimentKind, RunConfig
from ..exceptions import ArgumentError, DpByoaError
from ..framework import (
    DpRunOutput,
    dp_cc_saddle,
    dp_convex_minimize_phased,
    dp_csc_saddle,
    dp_sc_minimize,
    dp_scsc_saddle,
)
from ..oracle import duality_gap_exact
from ..privacy.streams import RandomStreams
from ..problems.base import MinimaxProblem, MinProblem, Problem
from ..problems.families import ProblemFamily
from .risk import (
    estimate_excess_risk,
    excess_empirical_risk,
    primal_gap_estimate,
    weak_gap_estimate,
)


logger = logging.getLogger(__name__)

CONFIG_COLUMNS = [
    "algorithm",
    "family",
    "solver",
    "n",
    "dim",
    "epsilon",
    "delta",
    "seed",
    "repetition",
]
METRIC_COLUMNS = [
    "excess_empirical_risk",
    "excess_population_risk",
    "empirical_gap",
    "population_gap",
    "noise_norm",
]
DIAGNOSTIC_COLUMNS = ["gradient_evals", "wall_time", "private", "holdout_undersized", "error"]

# Frozen column order of results.csv
CSV_COLUMNS = CONFIG_COLUMNS + METRIC_COLUMNS + DIAGNOSTIC_COLUMNS

GROUP_COLUMNS = ["algorithm", "family", "solver", "n", "dim", "epsilon", "delta"]

SUMMARY_COLUMNS = (
    GROUP_COLUMNS
    + [f"{m}_mean" for m in METRIC_COLUMNS]
    + [f"{m}_stderr" for m in METRIC_COLUMNS]
    + ["runs", "failures", "stderr_defined"]
)


class UtilityRecord(BaseModel):
    """One evaluated run: config echo, utility metrics and diagnostics."""

    algorithm: str
    family: str
    solver: str
    n: int
    dim: int
    epsilon: float
    delta: float
    seed: int
    repetition: int = 0
    excess_empirical_risk: Optional[float] = Field(default=None, description="Minimization only")
    excess_population_risk: Optional[float] = Field(default=None, description="Minimization only")
    empirical_gap: Optional[float] = Field(default=None, description="Gap on the training set")
    population_gap: Optional[float] = Field(default=None, description="Gap on the population")
    noise_norm: Optional[float] = Field(default=None, description="||released - pre-noise||")
    gradient_evals: int = 0
    wall_time: float = 0.0
    private: bool = True
    holdout_undersized: bool = False
    error: Optional[str] = None

    @model_validator(mode="after")
    def check_metrics(self) -> "UtilityRecord":
        for name in METRIC_COLUMNS:
            value = getattr(self, name)
            if value is not None and value < -1e-9:
                raise ValueError(f"{name} = {value} is negative")
        return self


@dataclass
class RunOutcome:
    """A DP run together with its evaluation."""

    output: DpRunOutput
    record: UtilityRecord
    problem: Problem


def _solver_name(config: RunConfig) -> str:
    if config.kind in MINIMAX_KINDS:
        return config.solver.minimax_kind.value
    return config.solver.min_kind.value


def _dispatch(config: RunConfig, problem: Problem, streams: RandomStreams) -> DpRunOutput:
    budget = config.privacy.budget(problem.n)
    common = {"no_noise": config.no_noise, "streams": streams.child("algorithm")}
    kind = config.kind
    if kind is ExperimentKind.SC_MIN:
        assert isinstance(problem, MinProblem)
        return dp_sc_minimize(problem, budget, config.solver.min_spec(), **common)
    if kind is ExperimentKind.CONVEX_MIN_PHASED:
        assert isinstance(problem, MinProblem)
        return dp_convex_minimize_phased(
            problem, budget, config.solver.min_spec(), mu=config.mu, **common
        )
    assert isinstance(problem, MinimaxProblem)
    spec = config.solver.minimax_spec()
    if kind is ExperimentKind.SCSC_SADDLE:
        return dp_scsc_saddle(problem, budget, spec, **common)
    if kind is ExperimentKind.CC_SADDLE:
        return dp_cc_saddle(problem, budget, spec, mu=config.mu, **common)
    if kind is ExperimentKind.CSC_SADDLE:
        return dp_csc_saddle(problem, budget, spec, mu=config.mu, **common)
    raise ArgumentError(f"'{kind.value}' is not an algorithm")


def _noise_norm(output: DpRunOutput) -> float:
    total = 0.0
    for released, pre_noise in ((output.x, output.x_pre_noise), (output.y, output.y_pre_noise)):
        if released is not None and pre_noise is not None:
            total += float(np.sum((released - pre_noise) ** 2))
    return float(np.sqrt(total))


def _evaluate(
    config: RunConfig,
    family: ProblemFamily,
    problem: Problem,
    output: DpRunOutput,
    streams: RandomStreams,
) -> dict:
    metrics: dict = {"noise_norm": _noise_norm(output)}
    if isinstance(problem, MinProblem):
        x = output.x_projected
        metrics["excess_empirical_risk"] = excess_empirical_risk(problem, x)
        try:
            metrics["excess_population_risk"] = family.population_excess_risk(x)
        except DpByoaError:
            holdout_n = config.problem.holdout_factor * problem.n
            holdout = family.make_problem(family.sample(holdout_n, streams.stream("holdout")))
            estimate = estimate_excess_risk(family, x, holdout, train_n=problem.n)
            metrics["excess_population_risk"] = max(estimate.value, 0.0)
            metrics["holdout_undersized"] = estimate.undersized
        return metrics

    if output.y_projected is None:
        metrics["empirical_gap"] = primal_gap_estimate(family, output.x_projected, problem)
        metrics["population_gap"] = primal_gap_estimate(family, output.x_projected)
    else:
        metrics["empirical_gap"] = duality_gap_exact(
            problem, output.x_projected, output.y_projected
        )
        metrics["population_gap"] = weak_gap_estimate(
            family, output.x_projected, output.y_projected
        )
    return metrics


def run_algorithm(
    config: RunConfig, seed: Optional[int] = None, repetition: int = 0
) -> RunOutcome:
    """
    Draw a dataset, run the configured DP algorithm on it and evaluate the output.

    Args:
        config: Config of one of the five algorithm kinds
        seed: Root seed of this run; defaults to config.seed
        repetition: Repetition index echoed into the record

    Returns:
        RunOutcome with the DP output, its UtilityRecord and the training problem

    Raises:
        ArgumentError: If the config is not an algorithm config
        PhaseFailedError: If a base solver fails
    """
    seed = config.seed if seed is None else seed
    streams = RandomStreams(seed)
    family = config.problem.build_family()
    samples = family.sample(config.problem.n, streams.stream("data"))
    problem = family.make_problem(samples)
    budget = config.privacy.budget(problem.n)

    started = time.perf_counter()
    output = _dispatch(config, problem, streams)
    wall_time = time.perf_counter() - started
    metrics = _evaluate(config, family, problem, output, streams)

    record = UtilityRecord(
        algorithm=config.kind.value,
        family=family.name,
        solver=_solver_name(config),
        n=problem.n,
        dim=family.dimension,
        epsilon=budget.epsilon,
        delta=budget.delta,
        seed=seed,
        repetition=repetition,
        gradient_evals=output.gradient_evals,
        wall_time=wall_time,
        private=output.private,
        **metrics,
    )
    logger.info(
        f"{config.kind.value} n={problem.n} eps={budget.epsilon:g} seed={seed}: "
        f"{output.gradient_evals} gradient evals in {wall_time:.2f}s"
    )
    return RunOutcome(output=output, record=record, problem=problem)


def sweep_points(config: RunConfig) -> list[RunConfig]:
    """One algorithm config per (n, epsilon) grid point, in grid order."""
    points = []
    for n in config.sweep.ns:
        for epsilon in config.sweep.epsilons:
            points.append(
                config.model_copy(
                    update={
                        "kind": config.sweep.algorithm,
                        "problem": config.problem.model_copy(update={"n": n}),
                        "privacy": config.privacy.model_copy(update={"epsilon": epsilon}),
                    }
                )
            )
    return points


def _run_record(config: RunConfig, seed: int, repetition: int) -> UtilityRecord:
    try:
        return run_algorithm(config, seed, repetition).record
    except (DpByoaError, ValueError) as e:
        logger.warning(
            f"Sweep run {config.kind.value} n={config.problem.n} seed={seed} failed: {e}"
        )
        budget = config.privacy.budget(config.problem.n)
        return UtilityRecord(
            algorithm=config.kind.value,
            family=config.problem.family.value,
            solver=_solver_name(config),
            n=config.problem.n,
            dim=config.problem.dim,
            epsilon=budget.epsilon,
            delta=budget.delta,
            seed=seed,
            repetition=repetition,
            private=not config.no_noise,
            error=type(e).__name__,
        )


def utility_sweep(
    config: RunConfig, jobs: int = 1, repetitions: Optional[int] = None
) -> list[UtilityRecord]:
    """
    Run every grid point of a sweep config with independent, matched seeds.

    Repetition r uses the same root seed at every grid point, so comparisons across
    n or epsilon are matched. Failed runs become records with `error` set.

    Args:
        config: UTILITY_SWEEP config
        jobs: Worker processes; 1 runs in-process
        repetitions: Override of config.sweep.repetitions

    Returns:
        Records ordered by grid point, then repetition
    """
    if config.kind is not ExperimentKind.UTILITY_SWEEP:
        raise ArgumentError(f"utility_sweep needs a utility_sweep config, got {config.kind.value}")
    reps = repetitions or config.sweep.repetitions
    root = RandomStreams(config.seed)
    seeds = [root.seed("repetition", r) for r in range(reps)]
    points = sweep_points(config)
    logger.info(f"Sweep: {len(points)} grid points x {reps} repetitions on {jobs} worker(s)")

    results: dict[tuple[int, int], UtilityRecord] = {}
    if jobs <= 1:
        for i, point in enumerate(points):
            for r, seed in enumerate(seeds):
                results[(i, r)] = _run_record(point, seed, r)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = {
                executor.submit(_run_record, point, seed, r): (i, r)
                for i, point in enumerate(points)
                for r, seed in enumerate(seeds)
            }
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    return [results[key] for key in sorted(results)]


def records_frame(records: Sequence[UtilityRecord]) -> pd.DataFrame:
    """Records as a DataFrame in CSV_COLUMNS order."""
    return pd.DataFrame([record.model_dump() for record in records], columns=CSV_COLUMNS)


def aggregate_records(records: Sequence[UtilityRecord]) -> pd.DataFrame:
    """
    Per-config mean and standard error of every metric over successful runs.

    Groups with a single run get NaN standard errors and stderr_defined = False.
    """
    frame = records_frame(records)
    done = frame[frame["error"].isna()]
    if done.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    failures = frame[frame["error"].notna()].groupby(GROUP_COLUMNS).size()
    metrics = done[GROUP_COLUMNS + METRIC_COLUMNS].astype({m: float for m in METRIC_COLUMNS})
    grouped = metrics.groupby(GROUP_COLUMNS, sort=True)
    summary = grouped.mean().add_suffix("_mean").join(grouped.sem().add_suffix("_stderr"))
    summary["runs"] = grouped.size()
    summary["failures"] = failures.reindex(summary.index, fill_value=0)
    summary["stderr_defined"] = summary["runs"] > 1
    return summary.reset_index()


def loglog_slope(ns: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    ns_arr = np.asarray(ns, dtype=float)
    values_arr = np.asarray(values, dtype=float)
    if ns_arr.shape != values_arr.shape or ns_arr.size < 2:
        raise ArgumentError("A slope needs at least two matching points")
    if np.any(ns_arr <= 0) or np.any(values_arr <= 0):
        raise ArgumentError("Log-log slopes need positive inputs")
    slope, _ = np.polyfit(np.log(ns_arr), np.log(values_arr), 1)
    return float(slope)
