"""Desk-scale acceptance suite behind `dp-byoa verify`."""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import (
    ExperimentKind,
    FamilyKind,
    ProbeConfig,
    ProblemConfig,
    RunConfig,
    SweepConfig,
)
from .evaluation.risk import gap_sandwich_probe
from .evaluation.stability import (
    prox_nonexpansiveness_probe,
    stability_probe_min,
    stability_probe_minimax,
)
from .evaluation.sweep import aggregate_records, loglog_slope, records_frame, utility_sweep
from .exceptions import DpByoaError, LedgerViolationError, RoutingError
from .framework import (
    ScheduleMode,
    csc_threshold,
    dp_cc_saddle,
    dp_convex_minimize_phased,
    dp_csc_saddle,
    dp_sc_minimize,
    make_phase_schedule,
)
from .oracle import exact_min_quadratic, exact_saddle_bilinear
from .privacy.ledger import LedgerEntry, PrivacyLedger
from .privacy.mechanisms import PrivacyBudget, add_gaussian_noise, gaussian_sigma
from .privacy.streams import RandomStreams
from .problems.base import MinimaxProblem, MinProblem
from .problems.families import BilinearFamily, QuadraticFamily
from .routers.experiment_router import ExperimentResult, ExperimentRouter, Subcommand
from .solvers import (
    MinimaxSolverKind,
    MinimaxSolverSpec,
    MinSolverKind,
    MinSolverSpec,
    ProxRegularizer,
    solve_min,
    solve_saddle,
)


logger = logging.getLogger(__name__)

STABILITY_NS = (25, 50, 100)


@dataclass
class AcceptanceRow:
    """One line of the verify table."""

    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


class AcceptanceSuite:
    """
    The acceptance rows, each a method returning (passed, detail).

    Args:
        quick: Halve every trial, seed and draw count
        seed: Root seed of all random streams
    """

    def __init__(self, quick: bool = False, seed: int = 0):
        self.quick = quick
        self.streams = RandomStreams(seed)
        self.rows: dict[str, Callable[[], tuple[bool, str]]] = {
            "stability_min": self.check_stability_min,
            "stability_min_regularized": self.check_stability_min_regularized,
            "stability_minimax": self.check_stability_minimax,
            "prox_nonexpansive": self.check_prox,
            "gap_sandwich": self.check_gap_sandwich,
            "noise_calibration": self.check_noise_calibration,
            "ledger_composition": self.check_ledger,
            "oracle_equivalence": self.check_oracle_equivalence,
            "noise_accounting": self.check_noise_accounting,
            "phase_schedule": self.check_schedule,
            "csc_routing": self.check_csc_routing,
            "determinism": self.check_determinism,
            "utility_trend": self.check_utility_trend,
        }

    def count(self, full: int) -> int:
        return max(1, full // 2) if self.quick else full

    def rng(self, *labels: str) -> np.random.Generator:
        return self.streams.stream(*labels)

    def run(self) -> list[AcceptanceRow]:
        results = []
        for name, check in self.rows.items():
            started = time.perf_counter()
            try:
                passed, detail = check()
            except DpByoaError as e:
                passed, detail = False, f"{type(e).__name__}: {e}"
            seconds = time.perf_counter() - started
            level = logging.INFO if passed else logging.ERROR
            logger.log(level, f"verify {name}: {'PASS' if passed else 'FAIL'} ({detail})")
            results.append(AcceptanceRow(name, passed, detail, seconds))
        return results

    def check_stability_min(self) -> tuple[bool, str]:
        family = QuadraticFamily(dim=2)
        reports = [
            stability_probe_min(family, n, self.count(200), self.rng("stability-min", str(n)))
            for n in STABILITY_NS
        ]
        violations = sum(r.violations for r in reports)
        ratio = max(r.max_shift / r.bound for r in reports)
        return violations == 0, f"{violations} violations, max shift/bound {ratio:.3f}"

    def check_stability_min_regularized(self) -> tuple[bool, str]:
        family = QuadraticFamily(dim=2)
        violations = 0
        for reg_mu in (0.5, 2.0):
            for n in STABILITY_NS:
                rng = self.rng("stability-reg", str(reg_mu), str(n))
                report = stability_probe_min(family, n, self.count(200), rng, reg_mu=reg_mu)
                violations += report.violations
        return violations == 0, f"{violations} violations over mu_reg in (0.5, 2)"

    def check_stability_minimax(self) -> tuple[bool, str]:
        family = BilinearFamily.random(2, 2, self.rng("bilinear-family"))
        violations = 0
        for reg_mu in (None, 1.0):
            for n in STABILITY_NS:
                rng = self.rng("stability-minimax", str(reg_mu), str(n))
                report = stability_probe_minimax(family, n, self.count(200), rng, reg_mu=reg_mu)
                violations += report.violations
        return violations == 0, f"{violations} violations with and without anchors"

    def _bilinear_problem(self, label: str, n: int = 50) -> MinimaxProblem:
        family = BilinearFamily.random(2, 2, self.rng(label, "family"))
        problem = family.make_problem(family.sample(n, self.rng(label, "data")))
        assert isinstance(problem, MinimaxProblem)
        return problem

    def check_prox(self) -> tuple[bool, str]:
        problem = self._bilinear_problem("prox")
        report = prox_nonexpansiveness_probe(problem, self.count(500), self.rng("prox", "pairs"))
        return report.ok, f"{report.violations}/{report.trials} violations"

    def check_gap_sandwich(self) -> tuple[bool, str]:
        problem = self._bilinear_problem("gap")
        lower, upper = gap_sandwich_probe(problem, self.count(1000), self.rng("gap", "points"))
        return (
            lower.ok and upper.ok,
            f"{lower.violations} lower / {upper.violations} upper violations",
        )

    def check_noise_calibration(self) -> tuple[bool, str]:
        rng = self.rng("calibration", "inputs")
        count = self.count(10_000)
        sensitivities = rng.uniform(1e-3, 10.0, count)
        epsilons = rng.uniform(0.01, 1.0, count)
        deltas = rng.uniform(1e-9, 0.5, count)
        worst = 0.0
        for s, eps, delta in zip(sensitivities, epsilons, deltas):
            expected = s * math.sqrt(2.0 * math.log(1.25 / delta)) / eps
            got = gaussian_sigma(float(s), PrivacyBudget(epsilon=eps, delta=delta))
            worst = max(worst, abs(got - expected) / expected)
        formula_ok = worst <= 1e-12

        sigma = 1.5
        draws = self.count(100_000)
        std_error = 0.0
        for seed in range(5):
            noise = add_gaussian_noise(np.zeros((draws, 3)), sigma, RandomStreams(seed).stream())
            std_error = max(std_error, float(np.max(np.abs(noise.std(axis=0) / sigma - 1.0))))
        return (
            formula_ok and std_error <= 0.02,
            f"max relative sigma error {worst:.1e}, max std deviation {100 * std_error:.2f}%",
        )

    def check_ledger(self) -> tuple[bool, str]:
        budget = PrivacyBudget(epsilon=0.5, delta=1e-3)
        other = PrivacyBudget(epsilon=0.25, delta=2e-3)
        sequential = PrivacyLedger(
            [
                LedgerEntry(mechanism="a", budget=budget, partition="all", start=0, stop=10),
                LedgerEntry(mechanism="b", budget=other, partition="all", start=0, stop=10),
            ]
        )
        parallel = PrivacyLedger(
            [
                LedgerEntry(
                    mechanism="a", budget=budget, partition="p1", start=0, stop=5, group="g"
                ),
                LedgerEntry(
                    mechanism="b", budget=other, partition="p2", start=5, stop=10, group="g"
                ),
            ]
        )
        seq_total, par_total = sequential.total(), parallel.total()
        sums_ok = seq_total.epsilon == 0.75 and seq_total.delta == 1e-3 + 2e-3
        max_ok = par_total.epsilon == 0.5 and par_total.delta == 2e-3

        overlapping = PrivacyLedger(
            [
                LedgerEntry(
                    mechanism="a", budget=budget, partition="p1", start=0, stop=6, group="g"
                ),
                LedgerEntry(
                    mechanism="b", budget=budget, partition="p2", start=5, stop=10, group="g"
                ),
            ]
        )
        try:
            overlapping.total()
            rejected = False
        except LedgerViolationError:
            rejected = True

        problem = self._bilinear_problem("ledger", n=16)
        run_budget = PrivacyBudget(epsilon=0.5, delta=1.0 / 32)
        output = dp_cc_saddle(
            problem, run_budget, MinimaxSolverSpec(), streams=self.streams.child("ledger")
        )
        total = output.ledger.total()
        cc_ok = total.epsilon == run_budget.epsilon and total.delta == run_budget.delta
        passed = sums_ok and max_ok and rejected and cc_ok
        return passed, (
            f"sequential {'ok' if sums_ok else 'WRONG'}, parallel {'ok' if max_ok else 'WRONG'}, "
            f"overlap {'rejected' if rejected else 'ACCEPTED'}, "
            f"cc total ({total.epsilon:g}, {total.delta:g})"
        )

    def check_oracle_equivalence(self) -> tuple[bool, str]:
        gamma = 1e-10
        instances = self.count(20)
        hits = runs = 0
        distance_ok = True
        for i in range(instances):
            rng = self.rng("oracle", "quadratic", str(i))
            family = QuadraticFamily(dim=5, mean=rng.uniform(-0.5, 0.5, 5))
            problem = family.make_problem(family.sample(100, rng))
            assert isinstance(problem, MinProblem)
            exact = exact_min_quadratic(problem).x
            for kind in (MinSolverKind.SVRG, MinSolverKind.SARAH):
                spec = MinSolverSpec(kind=kind, target=gamma, seed=i)
                result = solve_min(problem, spec, reference=exact)
                runs += 1
                hits += result.achieved is not None and result.achieved <= gamma
                distance = float(np.linalg.norm(result.point - exact))
                distance_ok &= distance <= 10.0 * math.sqrt(2.0 * gamma / family.mu)

        saddle_ok = True
        for i in range(instances):
            problem = self._bilinear_problem(f"oracle-bilinear-{i}", n=100)
            exact = exact_saddle_bilinear(problem)
            for saddle_kind in (MinimaxSolverKind.EXTRAGRADIENT, MinimaxSolverKind.SVRG_MINIMAX):
                saddle_spec = MinimaxSolverSpec(kind=saddle_kind, target=gamma, seed=i)
                saddle = solve_saddle(problem, saddle_spec, reference=(exact.x, exact.y))
                saddle_ok &= saddle.achieved is not None and saddle.achieved <= 20.0 * gamma
        passed = hits >= 0.9 * runs and distance_ok and saddle_ok
        return passed, (
            f"min {hits}/{runs} within gamma, distances {'ok' if distance_ok else 'EXCEEDED'}, "
            f"saddle {'ok' if saddle_ok else 'EXCEEDED'}"
        )

    def check_noise_accounting(self) -> tuple[bool, str]:
        dim, n = 20, 32
        family = QuadraticFamily(dim=dim)
        problem = family.make_problem(family.sample(n, self.rng("accounting", "data")))
        assert isinstance(problem, MinProblem)
        budget = PrivacyBudget(epsilon=0.5, delta=1.0 / (2 * n))
        c = problem.constants
        sigma = (
            4.0 * c.lipschitz * math.sqrt(2.0 * math.log(2.5 / budget.delta))
            / (c.mu * n * budget.epsilon)
        )
        runs = self.count(1000)
        squared = []
        sigma_ok = True
        for seed in range(runs):
            output = dp_sc_minimize(
                problem, budget, MinSolverSpec(), streams=self.streams.child(f"accounting-{seed}")
            )
            assert output.x is not None and output.x_pre_noise is not None
            squared.append(float(np.sum((output.x - output.x_pre_noise) ** 2)))
            sigma_ok &= abs(output.trace[0].sigma - sigma) <= 1e-12 * sigma
        expected = dim * sigma**2
        deviation = abs(float(np.mean(squared)) - expected) / expected
        return (
            sigma_ok and deviation <= 0.05,
            f"mean ||noise||^2 off d sigma^2 by {100 * deviation:.2f}% over {runs} runs",
        )

    def check_schedule(self) -> tuple[bool, str]:
        family = QuadraticFamily(dim=2)
        problems_ok = True
        notes = []
        for n in (16, 100, 1024):
            budget = PrivacyBudget(epsilon=0.5, delta=1.0 / (2 * n))
            mu = 0.1
            schedule = make_phase_schedule(n, mu, 1.0, budget, ScheduleMode.CONVEX_MIN)
            phases = schedule.phases
            structure_ok = (
                schedule.num_phases == int(math.floor(math.log2(n)))
                and all(p.mu == mu * 2.0**p.index for p in phases)
                and phases[0].start == 0
                and phases[-1].stop == n
                and all(a.stop == b.start for a, b in zip(phases, phases[1:]))
                and all(p.size >= 1 for p in phases)
            )

            problem = family.make_problem(family.sample(n, self.rng("schedule", str(n))))
            assert isinstance(problem, MinProblem)
            output = dp_convex_minimize_phased(
                problem, budget, MinSolverSpec(), streams=self.streams.child(f"schedule-{n}")
            )
            trace = output.trace
            chained = np.array_equal(trace[0].anchor, problem.domain.center) and all(
                np.array_equal(later.anchor, earlier.noised)
                for earlier, later in zip(trace, trace[1:])
            )
            total = output.ledger.total()
            ledger_ok = total.epsilon == budget.epsilon and total.delta == budget.delta
            problems_ok &= structure_ok and chained and ledger_ok
            notes.append(f"n={n}: K={schedule.num_phases}")
        return problems_ok, ", ".join(notes)

    def check_csc_routing(self) -> tuple[bool, str]:
        n = 64
        budget = PrivacyBudget(epsilon=0.5, delta=1.0 / (2 * n))
        routed = {}
        for label, mu_y in (("above", 1.0), ("below", 0.05)):
            family = BilinearFamily.random(2, 2, self.rng("csc", "family"), mu_y=mu_y)
            problem = family.make_problem(family.sample(n, self.rng("csc", "data")))
            assert isinstance(problem, MinimaxProblem)
            threshold = csc_threshold(problem.constants.lipschitz, problem.norm_bound, n)
            try:
                output = dp_csc_saddle(
                    problem,
                    budget,
                    MinimaxSolverSpec(),
                    no_noise=True,
                    streams=self.streams.child(f"csc-{label}"),
                )
            except RoutingError:
                routed[label] = (mu_y >= threshold, None, problem)
                continue
            routed[label] = (mu_y >= threshold, output, problem)

        above_ok, output, problem = routed["above"]
        below_ok, below_output, _ = routed["below"]
        if not above_ok or output is None or below_ok or below_output is not None:
            return False, "instances were not routed by the L/(D sqrt(n)) threshold"

        c = problem.constants
        zeros_y = np.zeros(problem.dim_y)
        worst = 0.0
        for trace in output.trace:
            block = problem.restrict(problem.samples.block(trace.start, trace.stop))
            reg = ProxRegularizer(trace.mu, 0.0, trace.anchor, zeros_y)
            exact = exact_saddle_bilinear(block, reg)
            result = trace.result
            dx, dy = result.x - exact.x, result.y - exact.y
            weighted = (c.mu_x + trace.mu) * float(dx @ dx) + c.mu_y * float(dy @ dy)
            worst = max(worst, weighted / (2.0 * trace.target))
        return worst <= 10.0, f"worst phase distance {worst:.2f}x its certified target"

    def check_determinism(self) -> tuple[bool, str]:
        configs = [
            RunConfig(kind=ExperimentKind.SC_MIN, problem=ProblemConfig(n=32)),
            RunConfig(kind=ExperimentKind.CONVEX_MIN_PHASED, problem=ProblemConfig(n=32)),
        ]
        bilinear = ProblemConfig(family=FamilyKind.BILINEAR, n=32)
        for kind in (
            ExperimentKind.SCSC_SADDLE,
            ExperimentKind.CC_SADDLE,
            ExperimentKind.CSC_SADDLE,
        ):
            configs.append(RunConfig(kind=kind, problem=bilinear))
        configs.append(
            RunConfig(
                kind=ExperimentKind.STABILITY_PROBE, probe=ProbeConfig(ns=[10, 20], trials=5)
            )
        )
        configs.append(
            RunConfig(
                kind=ExperimentKind.UTILITY_SWEEP,
                sweep=SweepConfig(algorithm=ExperimentKind.SC_MIN, ns=[16, 32], repetitions=2),
            )
        )
        subcommands = {
            ExperimentKind.STABILITY_PROBE: Subcommand.PROBE,
            ExperimentKind.UTILITY_SWEEP: Subcommand.SWEEP,
        }
        router = ExperimentRouter()
        mismatched = []
        for config in configs:
            subcommand = subcommands.get(config.kind, Subcommand.RUN)
            first, second = (
                _fingerprint(router.route(subcommand, config)) for _ in range(2)
            )
            if first != second:
                mismatched.append(config.kind.value)
        if mismatched:
            return False, f"outputs differ for {', '.join(mismatched)}"
        return True, f"{len(configs)} experiment kinds reproduced exactly"

    def check_utility_trend(self) -> tuple[bool, str]:
        config = RunConfig(
            kind=ExperimentKind.UTILITY_SWEEP,
            seed=self.streams.seed("utility"),
            sweep=SweepConfig(
                algorithm=ExperimentKind.SC_MIN,
                ns=[64, 256, 1024],
                repetitions=self.count(20),
            ),
        )
        summary = aggregate_records(utility_sweep(config))
        if len(summary) != len(config.sweep.ns):
            return False, f"only {len(summary)} of {len(config.sweep.ns)} sample sizes completed"
        slope = loglog_slope(summary["n"], summary["excess_population_risk_mean"])
        return slope < 0, f"excess population risk ~ n^{slope:.2f}"


def _fingerprint(result: ExperimentResult) -> tuple[str, str, tuple[bytes, ...]]:
    records = records_frame(result.records).drop(columns=["wall_time"]).to_csv(index=False)
    probes = "\n".join(probe.model_dump_json() for probe in result.probes)
    points = tuple(
        point.tobytes()
        for outcome in result.outcomes
        for point in (outcome.output.x, outcome.output.y)
        if point is not None
    )
    return records, probes, points


def run_acceptance_suite(quick: bool = False, seed: int = 0) -> list[AcceptanceRow]:
    """
    Run every acceptance row.

    Args:
        quick: Halve trial counts; every row still runs
        seed: Root seed

    Returns:
        One AcceptanceRow per check, in table order
    """
    return AcceptanceSuite(quick=quick, seed=seed).run()


def format_table(rows: list[AcceptanceRow]) -> str:
    """Fixed-width pass/fail table."""
    width = max(len(row.name) for row in rows)
    lines = [f"{'check':<{width}}  result  seconds  detail"]
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        lines.append(f"{row.name:<{width}}  {status:<6}  {row.seconds:7.2f}  {row.detail}")
    passed = sum(row.passed for row in rows)
    lines.append(f"{passed}/{len(rows)} checks passed")
    return "\n".join(lines) + "\n"
