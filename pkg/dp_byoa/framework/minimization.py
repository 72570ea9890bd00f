"""Output perturbation for strongly convex and phased convex minimization."""

import logging
from typing import Optional

import numpy as np

from ..exceptions import ArgumentError, BudgetExceededError, PhaseFailedError
from ..privacy.ledger import LedgerEntry, PrivacyLedger
from ..privacy.mechanisms import PrivacyBudget, add_gaussian_noise, gaussian_sigma
from ..privacy.streams import RandomStreams
from ..problems.base import MinProblem
from ..solvers.base import MinRegularizer, MinSolverSpec
from ..solvers.minimization import solve_min
from .output import DpRunOutput, PhaseTrace
from .schedule import ScheduleMode, default_mu, make_phase_schedule


logger = logging.getLogger(__name__)


def warn_no_noise(algorithm: str) -> None:
    logger.warning(
        f"{algorithm}: NO-NOISE MODE. Noise is disabled and the output is NOT differentially "
        f"private. Use for testing only."
    )


def dp_sc_minimize(
    problem: MinProblem,
    budget: PrivacyBudget,
    base: MinSolverSpec,
    seed: int = 0,
    no_noise: bool = False,
    streams: Optional[RandomStreams] = None,
) -> DpRunOutput:
    """
    Output perturbation for a strongly convex finite sum.

    Runs the base solver to gamma = delta^2 L^2 / (32 mu n^2) and releases
    A(S) + N(0, sigma^2 I) with sigma = 4L sqrt(2 ln(2.5/delta)) / (mu n eps).

    Args:
        problem: Problem with certified mu > 0 and L
        budget: Target (epsilon, delta)
        base: Base solver; its target and seed are overridden
        seed: Root seed, used when no streams are given
        no_noise: Testing only; releases the solver output unperturbed
        streams: Random streams to draw from instead of a fresh root seed

    Returns:
        DpRunOutput with one ledger entry at (epsilon, delta)

    Raises:
        ArgumentError: If the problem is not strongly convex
        PhaseFailedError: If the base solver exhausts its budget
    """
    c = problem.constants
    if c.mu <= 0:
        raise ArgumentError("dp_sc_minimize needs mu > 0; use the phased variant")
    streams = streams or RandomStreams(seed)
    n = problem.n
    target = budget.delta**2 * c.lipschitz**2 / (32.0 * c.mu * n**2)
    sensitivity = 4.0 * c.lipschitz / (c.mu * n)
    sigma = 0.0 if no_noise else gaussian_sigma(sensitivity, budget.scaled(1.0, 0.5))
    if no_noise:
        warn_no_noise("dp_sc_minimize")
    logger.info(f"dp_sc_minimize: n={n}, gamma={target:.3e}, sigma={sigma:.4g}")

    spec = base.model_copy(update={"target": target, "seed": streams.seed("solver")})
    try:
        result = solve_min(problem, spec)
    except BudgetExceededError as e:
        raise PhaseFailedError(f"dp_sc_minimize: base solver failed: {e}", []) from e

    noised = add_gaussian_noise(result.point, sigma, streams.stream("noise"))
    ledger = PrivacyLedger()
    ledger.append(
        LedgerEntry(
            mechanism="output",
            budget=budget,
            partition=f"0:{n}",
            start=0,
            stop=n,
            sensitivity=sensitivity,
            sigma=sigma,
            private=not no_noise,
        )
    )
    projected = problem.domain.project(noised)
    trace = PhaseTrace(
        phase=1,
        side="x",
        start=0,
        stop=n,
        anchor=None,
        mu=c.mu,
        sigma=sigma,
        target=target,
        result=result,
        pre_noise=result.point,
        noised=noised,
        projected=projected,
    )
    return DpRunOutput(
        algorithm="sc_min",
        ledger=ledger,
        seed=streams.root_seed,
        x=noised,
        x_pre_noise=result.point,
        x_projected=projected,
        trace=[trace],
        gradient_evals=result.gradient_evals,
    )


def dp_convex_minimize_phased(
    problem: MinProblem,
    budget: PrivacyBudget,
    base: MinSolverSpec,
    x0: Optional[np.ndarray] = None,
    mu: Optional[float] = None,
    seed: int = 0,
    no_noise: bool = False,
    streams: Optional[RandomStreams] = None,
) -> DpRunOutput:
    """
    Phased output perturbation for a convex finite sum.

    Phase k solves block-mean loss + (mu_k/2)||x - x_{k-1}||^2 on its own disjoint
    block, perturbs the solution and anchors the next phase at the noised point.

    Args:
        problem: Convex problem (mu may be 0)
        budget: Target (epsilon, delta)
        base: Base solver; target and seed are set per phase
        x0: First anchor; defaults to the domain center
        mu: Base regularization; defaults to default_mu
        seed: Root seed, used when no streams are given
        no_noise: Testing only
        streams: Random streams to draw from

    Returns:
        DpRunOutput with K parallel ledger entries over disjoint blocks

    Raises:
        ArgumentError: If n < 4 or x0 lies outside the domain
        PhaseFailedError: If a phase's solver fails; carries the completed phases
    """
    c = problem.constants
    n = problem.n
    domain = problem.domain
    streams = streams or RandomStreams(seed)
    if mu is None:
        mu = default_mu(
            c.lipschitz, domain.norm_bound, n, problem.dimension, budget, ScheduleMode.CONVEX_MIN
        )
    schedule = make_phase_schedule(n, mu, c.lipschitz, budget, ScheduleMode.CONVEX_MIN)
    anchor = domain.center.copy() if x0 is None else domain.check_point(x0)
    if not domain.contains(anchor):
        raise ArgumentError("The initial anchor must lie in the domain")
    if no_noise:
        warn_no_noise("dp_convex_minimize_phased")

    ledger = PrivacyLedger()
    trace: list[PhaseTrace] = []
    evals = 0
    for phase in schedule.phases:
        sigma = 0.0 if no_noise else phase.sigma
        block = problem.restrict(problem.samples.block(phase.start, phase.stop))
        spec = base.model_copy(
            update={"target": phase.target, "seed": streams.seed("solver", phase.index)}
        )
        try:
            result = solve_min(block, spec, MinRegularizer(phase.mu, anchor), x0=anchor)
        except BudgetExceededError as e:
            raise PhaseFailedError(
                f"dp_convex_minimize_phased: phase {phase.index} failed: {e}", trace
            ) from e
        noised = add_gaussian_noise(result.point, sigma, streams.stream("noise", phase.index))
        ledger.append(
            LedgerEntry(
                mechanism=f"phase-{phase.index}",
                budget=budget,
                partition=f"block-{phase.index}",
                start=phase.start,
                stop=phase.stop,
                group="phases",
                sensitivity=phase.sensitivity,
                sigma=sigma,
                private=not no_noise,
            )
        )
        trace.append(
            PhaseTrace(
                phase=phase.index,
                side="x",
                start=phase.start,
                stop=phase.stop,
                anchor=anchor,
                mu=phase.mu,
                sigma=sigma,
                target=phase.target,
                result=result,
                pre_noise=result.point,
                noised=noised,
                projected=domain.project(noised),
            )
        )
        evals += result.gradient_evals
        logger.info(
            f"Phase {phase.index}/{schedule.num_phases}: block {phase.size}, "
            f"mu_k={phase.mu:.4g}, sigma_k={sigma:.4g}, {result.gradient_evals} gradient evals"
        )
        anchor = noised

    last = trace[-1]
    return DpRunOutput(
        algorithm="convex_min_phased",
        ledger=ledger,
        seed=streams.root_seed,
        x=last.noised,
        x_pre_noise=last.pre_noise,
        x_projected=last.projected,
        trace=trace,
        schedule=schedule,
        gradient_evals=evals,
    )
