"""Output perturbation for SC-SC, convex-concave and convex-strongly-concave saddle problems."""

import logging
import math
from typing import Optional

import numpy as np

from ..exceptions import ArgumentError, BudgetExceededError, PhaseFailedError, RoutingError
from ..privacy.ledger import LedgerEntry, PrivacyLedger
from ..privacy.mechanisms import PrivacyBudget, add_gaussian_noise, gaussian_sigma
from ..privacy.streams import RandomStreams
from ..problems.base import BallDomain, MinimaxProblem
from ..solvers.base import MinimaxSolverSpec, ProxRegularizer
from ..solvers.minimax import solve_saddle
from .minimization import warn_no_noise
from .output import DpRunOutput, PhaseTrace
from .schedule import PhaseSchedule, ScheduleMode, csc_threshold, default_mu, make_phase_schedule


logger = logging.getLogger(__name__)


def dp_scsc_saddle(
    problem: MinimaxProblem,
    budget: PrivacyBudget,
    base: MinimaxSolverSpec,
    seed: int = 0,
    no_noise: bool = False,
    streams: Optional[RandomStreams] = None,
) -> DpRunOutput:
    """
    Output perturbation for a strongly convex-strongly concave finite sum.

    Runs the base solver to gamma = delta L^2 / (16 mu n^2) with mu = min(mu_x, mu_y)
    and perturbs x and y with
        sigma_x = (8L/(n eps)) sqrt(2 ln(5/delta) / (mu_x mu)),
        sigma_y = (8L/(n eps)) sqrt(2 ln(5/delta) / (mu_y mu)).

    Raises:
        ArgumentError: If mu_x or mu_y is zero
        PhaseFailedError: If the base solver exhausts its budget
    """
    c = problem.constants
    if c.mu_x <= 0 or c.mu_y <= 0:
        raise ArgumentError("dp_scsc_saddle needs mu_x > 0 and mu_y > 0")
    streams = streams or RandomStreams(seed)
    n = problem.n
    mu = c.mu
    target = budget.delta * c.lipschitz**2 / (16.0 * mu * n**2)
    half = budget.scaled(0.5, 0.5)
    calibration = budget.scaled(0.5, 0.25)
    sens_x = 4.0 * c.lipschitz / (n * math.sqrt(c.mu_x * mu))
    sens_y = 4.0 * c.lipschitz / (n * math.sqrt(c.mu_y * mu))
    sigma_x = 0.0 if no_noise else gaussian_sigma(sens_x, calibration)
    sigma_y = 0.0 if no_noise else gaussian_sigma(sens_y, calibration)
    if no_noise:
        warn_no_noise("dp_scsc_saddle")
    logger.info(
        f"dp_scsc_saddle: n={n}, gamma={target:.3e}, sigma_x={sigma_x:.4g}, sigma_y={sigma_y:.4g}"
    )

    spec = base.model_copy(update={"target": target, "seed": streams.seed("solver")})
    try:
        result = solve_saddle(problem, spec)
    except BudgetExceededError as e:
        raise PhaseFailedError(f"dp_scsc_saddle: base solver failed: {e}", []) from e

    x = add_gaussian_noise(result.x, sigma_x, streams.stream("noise", "x"))
    y = add_gaussian_noise(result.y, sigma_y, streams.stream("noise", "y"))
    ledger = PrivacyLedger()
    for side, sens, sigma in (("x", sens_x, sigma_x), ("y", sens_y, sigma_y)):
        ledger.append(
            LedgerEntry(
                mechanism=f"output/{side}",
                budget=half,
                partition=f"0:{n}",
                start=0,
                stop=n,
                sensitivity=sens,
                sigma=sigma,
                private=not no_noise,
            )
        )
    x_proj, y_proj = problem.domain_x.project(x), problem.domain_y.project(y)
    trace = [
        PhaseTrace(1, "x", 0, n, None, c.mu_x, sigma_x, target, result, result.x, x, x_proj),
        PhaseTrace(1, "y", 0, n, None, c.mu_y, sigma_y, target, result, result.y, y, y_proj),
    ]
    return DpRunOutput(
        algorithm="scsc_saddle",
        ledger=ledger,
        seed=streams.root_seed,
        x=x,
        y=y,
        x_pre_noise=result.x,
        y_pre_noise=result.y,
        x_projected=x_proj,
        y_projected=y_proj,
        trace=trace,
        gradient_evals=result.gradient_evals,
    )


def _phased_saddle(
    problem: MinimaxProblem,
    schedule: PhaseSchedule,
    side: str,
    other_mu: float,
    anchor: np.ndarray,
    budget: PrivacyBudget,
    base: MinimaxSolverSpec,
    streams: RandomStreams,
    no_noise: bool,
    algorithm: str,
) -> DpRunOutput:
    """
    Shared phase loop: regularize `side` at the chained anchor with mu_k and the
    other side at the origin with `other_mu`, solve, perturb `side` only.
    """
    domain: BallDomain = problem.domain_x if side == "x" else problem.domain_y
    zeros_x, zeros_y = np.zeros(problem.dim_x), np.zeros(problem.dim_y)
    ledger = PrivacyLedger()
    trace: list[PhaseTrace] = []
    evals = 0
    for phase in schedule.phases:
        if side == "x":
            reg = ProxRegularizer(phase.mu, other_mu, anchor, zeros_y)
            start = {"x0": anchor}
        else:
            reg = ProxRegularizer(other_mu, phase.mu, zeros_x, anchor)
            start = {"y0": anchor}
        block = problem.restrict(problem.samples.block(phase.start, phase.stop))
        spec = base.model_copy(
            update={"target": phase.target, "seed": streams.seed("solver", side, phase.index)}
        )
        try:
            result = solve_saddle(block, spec, reg, **start)
        except BudgetExceededError as e:
            raise PhaseFailedError(f"{algorithm}: phase {phase.index} failed: {e}", trace) from e
        sigma = 0.0 if no_noise else phase.sigma
        pre_noise = result.x if side == "x" else result.y
        noised = add_gaussian_noise(pre_noise, sigma, streams.stream("noise", side, phase.index))
        ledger.append(
            LedgerEntry(
                mechanism=f"phase-{phase.index}/{side}",
                budget=budget,
                partition=f"block-{phase.index}",
                start=phase.start,
                stop=phase.stop,
                group=f"{side}-phases",
                sensitivity=phase.sensitivity,
                sigma=sigma,
                private=not no_noise,
            )
        )
        trace.append(
            PhaseTrace(
                phase=phase.index,
                side=side,
                start=phase.start,
                stop=phase.stop,
                anchor=anchor,
                mu=phase.mu,
                sigma=sigma,
                target=phase.target,
                result=result,
                pre_noise=pre_noise,
                noised=noised,
                projected=domain.project(noised),
            )
        )
        evals += result.gradient_evals
        logger.info(
            f"{algorithm} phase {phase.index}/{schedule.num_phases}: block {phase.size}, "
            f"mu_k={phase.mu:.4g}, sigma_k={sigma:.4g}, {result.gradient_evals} gradient evals"
        )
        anchor = noised

    last = trace[-1]
    output = DpRunOutput(
        algorithm=algorithm,
        ledger=ledger,
        seed=streams.root_seed,
        trace=trace,
        schedule=schedule,
        gradient_evals=evals,
    )
    if side == "x":
        output.x = last.noised
        output.x_pre_noise = last.pre_noise
        output.x_projected = last.projected
    else:
        output.y = last.noised
        output.y_pre_noise = last.pre_noise
        output.y_projected = last.projected
    return output


def _cc_mu(problem: MinimaxProblem, budget: PrivacyBudget, mu: Optional[float]) -> float:
    if mu is not None:
        return mu
    return default_mu(
        problem.constants.lipschitz,
        problem.norm_bound,
        problem.n,
        max(problem.dim_x, problem.dim_y),
        budget,
        ScheduleMode.CONVEX_CONCAVE,
    )


def _initial_anchor(domain: BallDomain, point: Optional[np.ndarray]) -> np.ndarray:
    anchor = domain.center.copy() if point is None else domain.check_point(point)
    if not domain.contains(anchor):
        raise ArgumentError("The initial anchor must lie in the domain")
    return anchor


def dp_cc_saddle_primal(
    problem: MinimaxProblem,
    budget: PrivacyBudget,
    base: MinimaxSolverSpec,
    x0: Optional[np.ndarray] = None,
    mu: Optional[float] = None,
    seed: int = 0,
    no_noise: bool = False,
    streams: Optional[RandomStreams] = None,
) -> DpRunOutput:
    """
    Phased perturbation of the primal variable of a convex-concave problem.

    Phase k solves block objective + (mu_k/2)||x - x_{k-1}||^2 - (mu/2)||y||^2 to
    gamma_k = delta L^2 / (16 mu n_k^2) and perturbs x with
    sigma_k = (8L/(n_k eps)) sqrt(2 ln(5/delta) / (mu_k mu)). The ledger holds K
    parallel entries at (epsilon/2, delta/2).

    Args:
        problem: Convex-concave problem
        budget: Budget of the full primal-dual composition
        base: Base solver; target and seed are set per phase
        x0: First anchor; defaults to the center of the x domain
        mu: Base regularization; defaults to default_mu
        seed: Root seed, used when no streams are given
        no_noise: Testing only
        streams: Random streams to draw from

    Raises:
        ArgumentError: If n < 4 or x0 lies outside the domain
        PhaseFailedError: If a phase's solver fails
    """
    streams = streams or RandomStreams(seed)
    mu = _cc_mu(problem, budget, mu)
    anchor = _initial_anchor(problem.domain_x, x0)
    schedule = make_phase_schedule(
        problem.n, mu, problem.constants.lipschitz, budget, ScheduleMode.CONVEX_CONCAVE
    )
    if no_noise:
        warn_no_noise("dp_cc_saddle_primal")
    return _phased_saddle(
        problem, schedule, "x", mu, anchor, budget.scaled(0.5, 0.5), base, streams, no_noise,
        "cc_saddle_primal",
    )


def dp_cc_saddle_dual(
    problem: MinimaxProblem,
    budget: PrivacyBudget,
    base: MinimaxSolverSpec,
    y0: Optional[np.ndarray] = None,
    mu: Optional[float] = None,
    seed: int = 0,
    no_noise: bool = False,
    streams: Optional[RandomStreams] = None,
) -> DpRunOutput:
    """Mirror of dp_cc_saddle_primal: anchors and perturbs y, fixes (mu/2)||x||^2 on x."""
    streams = streams or RandomStreams(seed)
    mu = _cc_mu(problem, budget, mu)
    anchor = _initial_anchor(problem.domain_y, y0)
    schedule = make_phase_schedule(
        problem.n, mu, problem.constants.lipschitz, budget, ScheduleMode.CONVEX_CONCAVE
    )
    if no_noise:
        warn_no_noise("dp_cc_saddle_dual")
    return _phased_saddle(
        problem, schedule, "y", mu, anchor, budget.scaled(0.5, 0.5), base, streams, no_noise,
        "cc_saddle_dual",
    )


def dp_cc_saddle(
    problem: MinimaxProblem,
    budget: PrivacyBudget,
    base: MinimaxSolverSpec,
    x0: Optional[np.ndarray] = None,
    y0: Optional[np.ndarray] = None,
    mu: Optional[float] = None,
    seed: int = 0,
    no_noise: bool = False,
    streams: Optional[RandomStreams] = None,
) -> DpRunOutput:
    """
    Private saddle pair for a convex-concave problem.

    Runs the primal and dual phased algorithms on independent child streams over the
    same dataset and composes their ledgers sequentially to (epsilon, delta).
    """
    streams = streams or RandomStreams(seed)
    primal = dp_cc_saddle_primal(
        problem, budget, base, x0=x0, mu=mu, no_noise=no_noise, streams=streams.child("primal")
    )
    dual = dp_cc_saddle_dual(
        problem, budget, base, y0=y0, mu=mu, no_noise=no_noise, streams=streams.child("dual")
    )
    ledger = PrivacyLedger()
    ledger.extend(primal.ledger)
    ledger.extend(dual.ledger)
    return DpRunOutput(
        algorithm="cc_saddle",
        ledger=ledger,
        seed=streams.root_seed,
        x=primal.x,
        y=dual.y,
        x_pre_noise=primal.x_pre_noise,
        y_pre_noise=dual.y_pre_noise,
        x_projected=primal.x_projected,
        y_projected=dual.y_projected,
        trace=primal.trace + dual.trace,
        schedule=primal.schedule,
        gradient_evals=primal.gradient_evals + dual.gradient_evals,
    )


def dp_csc_saddle(
    problem: MinimaxProblem,
    budget: PrivacyBudget,
    base: MinimaxSolverSpec,
    x0: Optional[np.ndarray] = None,
    mu: Optional[float] = None,
    seed: int = 0,
    no_noise: bool = False,
    streams: Optional[RandomStreams] = None,
) -> DpRunOutput:
    """
    Phased primal perturbation for a convex-strongly concave problem.

    No y-regularizer is added; phase k perturbs x with
    sigma_k = (4L/(n_k eps)) sqrt(2 ln(2.5/delta) / (mu_k min(mu_k, mu_y))) and the
    ledger holds K parallel entries at (epsilon, delta).

    Raises:
        RoutingError: If mu_y < L/(D sqrt(n)); such problems belong to dp_cc_saddle
        ArgumentError: If n < 4 or x0 lies outside the domain
        PhaseFailedError: If a phase's solver fails
    """
    c = problem.constants
    threshold = csc_threshold(c.lipschitz, problem.norm_bound, problem.n)
    if c.mu_y < threshold:
        raise RoutingError(
            f"mu_y = {c.mu_y:.4g} is below L/(D sqrt(n)) = {threshold:.4g}; "
            f"use dp_cc_saddle for this problem"
        )
    streams = streams or RandomStreams(seed)
    if mu is None:
        mu = default_mu(
            c.lipschitz,
            problem.norm_bound,
            problem.n,
            problem.dim_x,
            budget,
            ScheduleMode.CSC,
        )
    anchor = _initial_anchor(problem.domain_x, x0)
    schedule = make_phase_schedule(
        problem.n, mu, c.lipschitz, budget, ScheduleMode.CSC, mu_y=c.mu_y
    )
    if no_noise:
        warn_no_noise("dp_csc_saddle")
    return _phased_saddle(
        problem, schedule, "x", 0.0, anchor, budget, base, streams, no_noise, "csc_saddle"
    )
