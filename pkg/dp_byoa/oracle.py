"""Exact solutions for the test families: closed forms, KKT solves and dense grids."""

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import linalg

from .exceptions import ArgumentError, NotSupportedError, OracleError
from .problems.base import BallDomain, MinimaxProblem, MinProblem, Problem, empirical_value
from .problems.bilinear import BilinearStructure
from .problems.quadratic import QuadraticStructure
from .solvers.base import MinRegularizer, ProxRegularizer


logger = logging.getLogger(__name__)

_KKT_RESIDUAL_TOL = 1e-10
_FALLBACK_RESIDUAL_TOL = 1e-13
_FALLBACK_MAX_ITER = 500_000


@dataclass
class OracleSolution:
    """An exact empirical minimizer or saddle point."""

    x: np.ndarray
    y: Optional[np.ndarray] = None
    interior: bool = True


def _strictly_inside(domain: BallDomain, point: np.ndarray) -> bool:
    return bool(np.linalg.norm(point - domain.center) < domain.radius)


def exact_min_quadratic(
    problem: MinProblem, regularizer: Optional[MinRegularizer] = None
) -> OracleSolution:
    """
    Minimizer of the quadratic problem, optionally with an anchor regularizer.

    Args:
        problem: Problem built by make_quadratic_min_problem
        regularizer: Optional (mu_reg/2)||x - anchor||^2 term

    Returns:
        The projection of (mu mean + mu_reg anchor)/(mu + mu_reg)

    Raises:
        NotSupportedError: If the problem is not a quadratic
    """
    if not isinstance(problem.structure, QuadraticStructure):
        raise NotSupportedError(f"No closed-form minimizer for family '{problem.family}'")
    mu = problem.structure.mu
    unconstrained = problem.samples.mean()
    if regularizer is not None and regularizer.mu > 0:
        unconstrained = (mu * unconstrained + regularizer.mu * regularizer.anchor) / (
            mu + regularizer.mu
        )
    return OracleSolution(
        x=problem.domain.project(unconstrained),
        interior=_strictly_inside(problem.domain, unconstrained),
    )


def _bilinear_parts(
    problem: MinimaxProblem, reg: Optional[ProxRegularizer]
) -> tuple[BilinearStructure, np.ndarray, np.ndarray, ProxRegularizer]:
    structure = problem.structure
    if not isinstance(structure, BilinearStructure):
        raise NotSupportedError(f"No closed-form saddle for family '{problem.family}'")
    matrix, offset = structure.means(problem.samples)
    return structure, matrix, offset, reg or ProxRegularizer.zero(problem.dim_x, problem.dim_y)


def _projected_extragradient(
    problem: MinimaxProblem,
    matrix: np.ndarray,
    offset: np.ndarray,
    mu_x: float,
    mu_y: float,
    reg: ProxRegularizer,
    x: np.ndarray,
    y: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Full-batch projected extragradient on the mean operator, run to a 1e-13 residual."""

    def operator(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        gx = mu_x * u + matrix.T @ v - reg.mu_x * reg.anchor_x
        gy = -(matrix @ u - offset) + mu_y * v - reg.mu_y * reg.anchor_y
        return gx, gy

    lipschitz = max(mu_x, mu_y) + float(np.linalg.norm(matrix, ord=2))
    step = 1.0 / (2.0 * lipschitz)
    dx, dy = problem.domain_x, problem.domain_y
    x, y = dx.project(x), dy.project(y)
    for _ in range(_FALLBACK_MAX_ITER):
        gx, gy = operator(x, y)
        xh, yh = dx.project(x - step * gx), dy.project(y - step * gy)
        if np.sqrt(np.sum((x - xh) ** 2) + np.sum((y - yh) ** 2)) <= _FALLBACK_RESIDUAL_TOL:
            return x, y
        hx, hy = operator(xh, yh)
        x, y = dx.project(x - step * hx), dy.project(y - step * hy)
    raise OracleError("Projected extragradient did not reach the oracle residual tolerance")


def exact_saddle_bilinear(
    problem: MinimaxProblem, reg: Optional[ProxRegularizer] = None
) -> OracleSolution:
    """
    Saddle point of the bilinear-quadratic empirical objective.

    Solves the KKT system
        [(mu_x + r_x) I, A^T; A, -(mu_y + r_y) I] [x; y] = [r_x a_x; b - r_y a_y]
    with the sample means A, b. When the solution leaves a domain, a projected
    extragradient run from it gives the constrained saddle instead.

    Raises:
        NotSupportedError: If the problem is not bilinear-quadratic
        ArgumentError: If an effective modulus is zero
        OracleError: If the system is singular or fails its residual check
    """
    _, matrix, offset, reg = _bilinear_parts(problem, reg)
    c = problem.constants
    mu_x, mu_y = c.mu_x + reg.mu_x, c.mu_y + reg.mu_y
    if mu_x <= 0 or mu_y <= 0:
        raise ArgumentError("The exact saddle oracle needs positive effective moduli")
    dim_x, dim_y = problem.dim_x, problem.dim_y
    system = np.block(
        [
            [mu_x * np.eye(dim_x), matrix.T],
            [matrix, -mu_y * np.eye(dim_y)],
        ]
    )
    rhs = np.concatenate([reg.mu_x * reg.anchor_x, offset - reg.mu_y * reg.anchor_y])
    try:
        solution = linalg.solve(system, rhs)
    except linalg.LinAlgError as e:
        raise OracleError(f"Singular saddle system: {e}") from e
    residual = float(np.linalg.norm(system @ solution - rhs))
    if residual > _KKT_RESIDUAL_TOL * (1.0 + float(np.linalg.norm(rhs))):
        raise OracleError(f"Saddle system residual {residual:.3e} exceeds tolerance")
    x, y = solution[:dim_x], solution[dim_x:]
    if _strictly_inside(problem.domain_x, x) and _strictly_inside(problem.domain_y, y):
        return OracleSolution(x=x, y=y, interior=True)

    logger.debug("Unconstrained saddle leaves the domain; refining with projected extragradient")
    x, y = _projected_extragradient(problem, matrix, offset, mu_x, mu_y, reg, x, y)
    return OracleSolution(x=x, y=y, interior=False)


def _ball_grid(domain: BallDomain, resolution: int) -> tuple[np.ndarray, float]:
    axes = [np.linspace(c - domain.radius, c + domain.radius, resolution) for c in domain.center]
    points = np.array(list(itertools.product(*axes)))
    inside = np.linalg.norm(points - domain.center, axis=1) <= domain.radius * (1.0 + 1e-12)
    return points[inside], 2.0 * domain.radius / (resolution - 1)


def grid_bruteforce(
    problem: Problem,
    resolution: int,
    regularizer: Optional[Union[MinRegularizer, ProxRegularizer]] = None,
) -> OracleSolution:
    """
    Exhaustive search over a product grid restricted to the domain ball(s).

    Args:
        problem: Minimization or saddle problem with total dimension at most 4
        resolution: Grid points per axis, between 2 and 201
        regularizer: Optional regularizer matching the problem kind

    Returns:
        The best grid point; for saddles the x minimizing the grid worst case over y
        and the y maximizing the grid worst case over x

    Raises:
        ArgumentError: If the dimension or resolution is out of range
    """
    if not 2 <= resolution <= 201:
        raise ArgumentError(f"Grid resolution must lie in [2, 201], got {resolution}")

    if isinstance(problem, MinimaxProblem):
        if problem.dim_x + problem.dim_y > 4:
            raise ArgumentError("Grid search supports total dimension at most 4")
        reg = regularizer if isinstance(regularizer, ProxRegularizer) else None
        xs, step_x = _ball_grid(problem.domain_x, resolution)
        ys, step_y = _ball_grid(problem.domain_y, resolution)
        values = np.array(
            [
                [
                    empirical_value(problem, x, y) + (reg.value(x, y) if reg else 0.0)
                    for y in ys
                ]
                for x in xs
            ]
        )
        x_best = xs[int(np.argmin(values.max(axis=1)))]
        y_best = ys[int(np.argmax(values.min(axis=0)))]
        interior = bool(
            np.linalg.norm(x_best - problem.domain_x.center) < problem.domain_x.radius - step_x
            and np.linalg.norm(y_best - problem.domain_y.center)
            < problem.domain_y.radius - step_y
        )
        return OracleSolution(x=x_best, y=y_best, interior=interior)

    if problem.dimension > 4:
        raise ArgumentError("Grid search supports dimension at most 4")
    reg_min = regularizer if isinstance(regularizer, MinRegularizer) else None
    xs, step = _ball_grid(problem.domain, resolution)
    values = np.array(
        [empirical_value(problem, x) + (reg_min.value(x) if reg_min else 0.0) for x in xs]
    )
    x_best = xs[int(np.argmin(values))]
    return OracleSolution(
        x=x_best,
        interior=bool(
            np.linalg.norm(x_best - problem.domain.center) < problem.domain.radius - step
        ),
    )


def _best_response(
    domain: BallDomain, linear: np.ndarray, curvature: float
) -> np.ndarray:
    """argmax over the ball of <linear, z> - (curvature/2)||z||^2."""
    if curvature > 0:
        return domain.project(linear / curvature)
    norm = float(np.linalg.norm(linear))
    if norm == 0.0:
        return domain.center.copy()
    return domain.center + domain.radius * linear / norm


def duality_gap_exact(
    problem: MinimaxProblem,
    x: np.ndarray,
    y: np.ndarray,
    reg: Optional[ProxRegularizer] = None,
) -> float:
    """
    max_y' F(x, y') - min_x' F(x', y) of the empirical (optionally regularized) objective.

    Raises:
        NotSupportedError: If the problem is not bilinear-quadratic
    """
    _, matrix, offset, reg = _bilinear_parts(problem, reg)
    x = problem.domain_x.check_point(x)
    y = problem.domain_y.check_point(y)
    c = problem.constants

    # y' maximizes <A x - b + r_y a_y, y'> - ((mu_y + r_y)/2)||y'||^2
    y_best = _best_response(
        problem.domain_y, matrix @ x - offset + reg.mu_y * reg.anchor_y, c.mu_y + reg.mu_y
    )
    # x' maximizes <-(A^T y - r_x a_x), x'> - ((mu_x + r_x)/2)||x'||^2
    x_best = _best_response(
        problem.domain_x, -(matrix.T @ y - reg.mu_x * reg.anchor_x), c.mu_x + reg.mu_x
    )
    upper = empirical_value(problem, x, y_best) + reg.value(x, y_best)
    lower = empirical_value(problem, x_best, y) + reg.value(x_best, y)
    return upper - lower


def primal_value_bilinear(
    problem: MinimaxProblem, x: np.ndarray, reg: Optional[ProxRegularizer] = None
) -> tuple[float, np.ndarray]:
    """
    max_y F(x, y) of the bilinear-quadratic objective and its gradient in x.

    The inner maximizer is the closed-form best response over the y-ball, so no
    modulus needs to be positive. The gradient is mu_x x + A^T y*(x) - r_x a_x.

    Raises:
        NotSupportedError: If the problem is not bilinear-quadratic
    """
    _, matrix, offset, reg = _bilinear_parts(problem, reg)
    c = problem.constants
    y_best = _best_response(
        problem.domain_y, matrix @ x - offset + reg.mu_y * reg.anchor_y, c.mu_y + reg.mu_y
    )
    value = empirical_value(problem, x, y_best) + reg.value(x, y_best)
    grad = (c.mu_x + reg.mu_x) * x + matrix.T @ y_best - reg.mu_x * reg.anchor_x
    return float(value), grad
