"""Excess risk and duality-gap measurements on training, holdout and population objectives."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from ..exceptions import ArgumentError, NotSupportedError
from ..oracle import (
    duality_gap_exact,
    exact_min_quadratic,
    exact_saddle_bilinear,
    primal_value_bilinear,
)
from ..problems.base import (
    BallDomain,
    MinimaxProblem,
    MinProblem,
    empirical_value,
    sample_in_ball,
)
from ..problems.families import ProblemFamily
from ..problems.quadratic import QuadraticStructure
from .stability import InequalityReport


logger = logging.getLogger(__name__)

# Holdouts smaller than this multiple of the training size are flagged
MIN_HOLDOUT_FACTOR = 10


@dataclass
class RiskEstimate:
    """Holdout estimate of an excess risk with its standard error."""

    value: float
    stderr: float
    holdout_size: int
    undersized: bool = False


def empirical_minimizer(problem: MinProblem) -> np.ndarray:
    """
    Minimizer of the empirical objective over the domain.

    Closed form for the quadratic family; otherwise SLSQP with the ball as an
    inequality constraint.
    """
    if isinstance(problem.structure, QuadraticStructure):
        return exact_min_quadratic(problem).x

    domain = problem.domain

    def objective(x: np.ndarray) -> tuple[float, np.ndarray]:
        return float(np.mean(problem.sample_losses(x))), problem.sample_grads(x).mean(axis=0)

    constraint = {
        "type": "ineq",
        "fun": lambda x: domain.radius**2 - float(np.sum((x - domain.center) ** 2)),
        "jac": lambda x: -2.0 * (x - domain.center),
    }
    result = minimize(
        objective,
        domain.center.copy(),
        jac=True,
        method="SLSQP",
        constraints=[constraint],
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    if not result.success:
        logger.warning(f"SLSQP did not converge on the empirical objective: {result.message}")
    return domain.project(result.x)


def excess_empirical_risk(problem: MinProblem, x: np.ndarray) -> float:
    """F_S(x) - min F_S; never negative since the minimum is at most F_S(x) itself."""
    value = empirical_value(problem, x)
    best = min(empirical_value(problem, empirical_minimizer(problem)), value)
    return value - best


def estimate_excess_risk(
    family: ProblemFamily,
    x: np.ndarray,
    holdout_problem: MinProblem,
    train_n: Optional[int] = None,
) -> RiskEstimate:
    """
    Holdout estimate of F(x) - F(x*) from paired per-sample differences.

    Args:
        family: Family the holdout was drawn from
        x: Point to evaluate
        holdout_problem: Problem built on samples disjoint from training
        train_n: Training size; holdouts below 10x this size are flagged

    Returns:
        RiskEstimate; x* is the family's population optimum when known, otherwise
        the minimizer of the holdout objective
    """
    try:
        reference = family.population_optimum()
    except NotSupportedError:
        reference = empirical_minimizer(holdout_problem)
    x = holdout_problem.domain.check_point(x)
    diffs = holdout_problem.sample_losses(x) - holdout_problem.sample_losses(reference)
    m = diffs.shape[0]
    stderr = float(np.std(diffs, ddof=1) / np.sqrt(m)) if m > 1 else float("nan")
    undersized = train_n is not None and m < MIN_HOLDOUT_FACTOR * train_n
    if undersized:
        logger.warning(
            f"Holdout of {m} samples is below {MIN_HOLDOUT_FACTOR}x the training size {train_n}"
        )
    return RiskEstimate(
        value=float(diffs.mean()), stderr=stderr, holdout_size=m, undersized=undersized
    )


def excess_population_risk(
    family: ProblemFamily,
    x: np.ndarray,
    holdout_problem: Optional[MinProblem] = None,
    train_n: Optional[int] = None,
) -> float:
    """
    F(x) - min F over the population.

    Exact when the family knows its population optimum and no holdout is given,
    otherwise the holdout estimate.

    Raises:
        NotSupportedError: If neither a closed form nor a holdout is available
    """
    if holdout_problem is None:
        return family.population_excess_risk(x)
    return estimate_excess_risk(family, x, holdout_problem, train_n).value


def _gap_objective(family: ProblemFamily, holdout: Optional[MinimaxProblem]) -> MinimaxProblem:
    if not family.is_minimax:
        raise NotSupportedError(f"Family '{family.name}' has no duality gap")
    return family.population_problem() if holdout is None else holdout


def weak_gap_estimate(
    family: ProblemFamily,
    x: np.ndarray,
    y: np.ndarray,
    holdout: Optional[MinimaxProblem] = None,
) -> float:
    """
    max_y' F(x, y') - min_x' F(x', y) of the population objective.

    The population objective is the family's mean problem; with a holdout the
    holdout-mean objective is used instead.

    Raises:
        NotSupportedError: If the family has no closed-form inner problems
    """
    return duality_gap_exact(_gap_objective(family, holdout), x, y)


def minimax_value(problem: MinimaxProblem) -> float:
    """
    min_x max_y F(x, y) over the domains.

    Read off the exact saddle when both moduli are positive. A problem that is
    merely convex in x minimizes the closed-form primal function with SLSQP.
    """
    c = problem.constants
    if c.mu_x > 0 and c.mu_y > 0:
        saddle = exact_saddle_bilinear(problem)
        return empirical_value(problem, saddle.x, saddle.y)

    domain = problem.domain_x
    constraint = {
        "type": "ineq",
        "fun": lambda x: domain.radius**2 - float(np.sum((x - domain.center) ** 2)),
        "jac": lambda x: -2.0 * (x - domain.center),
    }
    result = minimize(
        lambda x: primal_value_bilinear(problem, domain.project(x)),
        domain.center.copy(),
        jac=True,
        method="SLSQP",
        constraints=[constraint],
        options={"ftol": 1e-14, "maxiter": 1000},
    )
    if not result.success:
        logger.warning(f"SLSQP did not converge on the primal function: {result.message}")
    return primal_value_bilinear(problem, domain.project(result.x))[0]


def primal_gap_estimate(
    family: ProblemFamily, x: np.ndarray, holdout: Optional[MinimaxProblem] = None
) -> float:
    """max_y F(x, y) - min_x' max_y F(x', y), for algorithms that release only x."""
    problem = _gap_objective(family, holdout)
    value, _ = primal_value_bilinear(problem, problem.domain_x.check_point(x))
    return max(value - minimax_value(problem), 0.0)


def _perturbation_ball(domain: BallDomain, point: np.ndarray, scale: float) -> BallDomain:
    room = domain.radius - float(np.linalg.norm(point - domain.center))
    return BallDomain(point, scale * room)


def gap_sandwich_probe(
    problem: MinimaxProblem,
    perturbations: int,
    rng: np.random.Generator,
    scale: float = 0.5,
    slack: float = 1e-9,
) -> tuple[InequalityReport, InequalityReport]:
    """
    Check both quadratic bounds on the duality gap around an interior saddle.

    For (x, y) = (x* + dx, y* + dy):
        gap >= (mu_x/2)||dx||^2 + (mu_y/2)||dy||^2
        gap <= ((kappa_y + 1) l/2)||dx||^2 + ((kappa_x + 1) l/2)||dy||^2
    with kappa_x = l/mu_x and kappa_y = l/mu_y.

    Args:
        problem: SC-SC problem with an exact oracle
        perturbations: Number of random points
        rng: Random stream
        scale: Perturbations stay within this fraction of the distance to the boundary
        slack: Numerical tolerance

    Returns:
        (lower, upper) reports

    Raises:
        ArgumentError: If a modulus is zero or the saddle is on the boundary
    """
    c = problem.constants
    if c.mu_x <= 0 or c.mu_y <= 0:
        raise ArgumentError("The gap sandwich needs mu_x > 0 and mu_y > 0")
    saddle = exact_saddle_bilinear(problem)
    if not saddle.interior:
        raise ArgumentError("The gap upper bound needs an interior saddle")
    ell = c.smoothness
    kappa_x, kappa_y = ell / c.mu_x, ell / c.mu_y
    xs = sample_in_ball(_perturbation_ball(problem.domain_x, saddle.x, scale), rng, perturbations)
    ys = sample_in_ball(_perturbation_ball(problem.domain_y, saddle.y, scale), rng, perturbations)

    lower_bad = upper_bad = 0
    lower_worst = upper_worst = -np.inf
    for x, y in zip(xs, ys):
        dx2 = float(np.sum((x - saddle.x) ** 2))
        dy2 = float(np.sum((y - saddle.y) ** 2))
        gap = duality_gap_exact(problem, x, y)
        lower = 0.5 * c.mu_x * dx2 + 0.5 * c.mu_y * dy2
        upper = 0.5 * (kappa_y + 1.0) * ell * dx2 + 0.5 * (kappa_x + 1.0) * ell * dy2
        lower_worst = max(lower_worst, lower - gap)
        upper_worst = max(upper_worst, gap - upper)
        lower_bad += gap < lower - slack
        upper_bad += gap > upper + slack
    logger.info(
        f"Gap sandwich: {lower_bad} lower and {upper_bad} upper violations "
        f"over {perturbations} points"
    )
    return (
        InequalityReport("gap_lower", perturbations, lower_bad, lower_worst),
        InequalityReport("gap_upper", perturbations, upper_bad, upper_worst),
    )
