"""Empirical stability of exact empirical optima over neighbouring datasets."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import ArgumentError, NotSupportedError
from ..oracle import exact_min_quadratic, exact_saddle_bilinear
from ..problems.base import BallDomain, MinimaxProblem, SampleSet, sample_in_ball
from ..problems.families import ProblemFamily
from ..solvers.base import MinRegularizer, ProxRegularizer


logger = logging.getLogger(__name__)

# Added to every bound to absorb oracle round-off
STABILITY_SLACK = 1e-6


@dataclass
class StabilityReport:
    """Outcome of a stability probe."""

    trials: int
    max_shift: float
    bound: float
    violations: int
    n: int = 0
    shifts: list[float] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.violations == 0


@dataclass
class InequalityReport:
    """Violation count of an inequality checked on random instances."""

    name: str
    trials: int
    violations: int
    worst_margin: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _neighbour(
    family: ProblemFamily, samples: SampleSet, rng: np.random.Generator
) -> SampleSet:
    index = int(rng.integers(samples.size))
    fresh = family.sample(1, rng)[0]
    return samples.replace(index, fresh)


def neighbor_shift_min(
    family: ProblemFamily,
    samples: SampleSet,
    neighbour: SampleSet,
    regularizer: Optional[MinRegularizer] = None,
) -> float:
    """
    ||x*_S - x*_S'|| between the exact empirical minimizers of two datasets.

    Raises:
        NotSupportedError: If the family has no exact minimizer
    """
    if family.is_minimax:
        raise NotSupportedError(f"Family '{family.name}' is not a minimization family")
    first = exact_min_quadratic(family.make_problem(samples), regularizer)
    second = exact_min_quadratic(family.make_problem(neighbour), regularizer)
    return float(np.linalg.norm(first.x - second.x))


def neighbor_shift_minimax(
    family: ProblemFamily,
    samples: SampleSet,
    neighbour: SampleSet,
    reg: Optional[ProxRegularizer] = None,
) -> float:
    """
    mu_x ||dx||^2 + mu_y ||dy||^2 between exact empirical saddles of two datasets.

    The moduli are the effective ones, i.e. including the regularizer.
    """
    if not family.is_minimax:
        raise NotSupportedError(f"Family '{family.name}' is not a saddle family")
    problem = family.make_problem(samples)
    first = exact_saddle_bilinear(problem, reg)
    second = exact_saddle_bilinear(family.make_problem(neighbour), reg)
    mu_x, mu_y = _effective_moduli(problem, reg)
    dx, dy = first.x - second.x, first.y - second.y
    return mu_x * float(dx @ dx) + mu_y * float(dy @ dy)


def _effective_moduli(
    problem: MinimaxProblem, reg: Optional[ProxRegularizer]
) -> tuple[float, float]:
    c = problem.constants
    if reg is None:
        return c.mu_x, c.mu_y
    return c.mu_x + reg.mu_x, c.mu_y + reg.mu_y


def stability_probe_min(
    family: ProblemFamily,
    n: int,
    trials: int,
    rng: np.random.Generator,
    reg_mu: Optional[float] = None,
) -> StabilityReport:
    """
    Measure ||x*_S - x*_S'|| over random neighbouring pairs against 2L/(mu n).

    Args:
        family: Minimization family with an exact oracle
        n: Dataset size
        trials: Number of neighbouring pairs
        rng: Random stream for data, swap position and anchors
        reg_mu: When set, every solve adds (reg_mu/2)||x - a||^2 with a random anchor a
            and the bound becomes 2L/(reg_mu n), using only the regularizer's modulus

    Returns:
        StabilityReport with the largest shift and the violation count
    """
    if trials < 1:
        raise ArgumentError(f"A probe needs at least one trial, got {trials}")
    shifts = []
    bound = 0.0
    for _ in range(trials):
        samples = family.sample(n, rng)
        neighbour = _neighbour(family, samples, rng)
        problem = family.make_problem(samples)
        regularizer = None
        if reg_mu is not None:
            anchor = sample_in_ball(problem.domain, rng, 1)[0]
            regularizer = MinRegularizer(reg_mu, anchor)
        modulus = reg_mu if reg_mu is not None else problem.constants.mu
        bound = 2.0 * problem.constants.lipschitz / (modulus * n)
        shifts.append(neighbor_shift_min(family, samples, neighbour, regularizer))

    violations = sum(shift > bound + STABILITY_SLACK for shift in shifts)
    report = StabilityReport(
        trials=trials,
        max_shift=max(shifts),
        bound=bound,
        violations=violations,
        n=n,
        shifts=shifts,
    )
    logger.info(
        f"Stability (min) n={n}: max shift {report.max_shift:.3e} vs bound {bound:.3e}, "
        f"{violations} violations"
    )
    return report


def stability_probe_minimax(
    family: ProblemFamily,
    n: int,
    trials: int,
    rng: np.random.Generator,
    reg_mu: Optional[float] = None,
) -> StabilityReport:
    """
    Measure mu_x||dx||^2 + mu_y||dy||^2 over neighbouring pairs against 4L^2/(mu n^2).

    With reg_mu set, each solve adds the anchored regularizer
    (reg_mu/2)||x - u||^2 - (reg_mu/2)||y - v||^2 at random (u, v), and mu is the
    smaller effective modulus.
    """
    if trials < 1:
        raise ArgumentError(f"A probe needs at least one trial, got {trials}")
    shifts = []
    bound = 0.0
    for _ in range(trials):
        samples = family.sample(n, rng)
        neighbour = _neighbour(family, samples, rng)
        problem = family.make_problem(samples)
        reg = None
        if reg_mu is not None:
            reg = ProxRegularizer(
                reg_mu,
                reg_mu,
                sample_in_ball(problem.domain_x, rng, 1)[0],
                sample_in_ball(problem.domain_y, rng, 1)[0],
            )
        mu = min(_effective_moduli(problem, reg))
        if mu <= 0:
            raise ArgumentError("Minimax stability needs positive effective moduli")
        bound = 4.0 * problem.constants.lipschitz**2 / (mu * n**2)
        shifts.append(neighbor_shift_minimax(family, samples, neighbour, reg))

    violations = sum(shift > bound + STABILITY_SLACK for shift in shifts)
    logger.info(
        f"Stability (minimax) n={n}: max weighted shift {max(shifts):.3e} vs bound "
        f"{bound:.3e}, {violations} violations"
    )
    return StabilityReport(
        trials=trials,
        max_shift=max(shifts),
        bound=bound,
        violations=violations,
        n=n,
        shifts=shifts,
    )


def _random_anchor(domain: BallDomain, rng: np.random.Generator) -> np.ndarray:
    return sample_in_ball(domain, rng, 1)[0]


def prox_nonexpansiveness_probe(
    problem: MinimaxProblem,
    pairs: int,
    rng: np.random.Generator,
    mu_x: float = 1.0,
    mu_y: float = 1.0,
    slack: float = 1e-9,
) -> InequalityReport:
    """
    Check that moving the regularizer anchor moves the regularized saddle no further.

    For random anchor pairs (u, v), (u', v') the saddles z, z' of
    f + (mu_x/2)||x - u||^2 - (mu_y/2)||y - v||^2 satisfy
        mu_x||x - x'||^2 + mu_y||y - y'||^2 <= mu_x||u - u'||^2 + mu_y||v - v'||^2.
    """
    if mu_x <= 0 or mu_y <= 0:
        raise ArgumentError("Prox probe needs positive regularizer moduli")
    violations = 0
    worst = -np.inf
    for _ in range(pairs):
        u1, u2 = _random_anchor(problem.domain_x, rng), _random_anchor(problem.domain_x, rng)
        v1, v2 = _random_anchor(problem.domain_y, rng), _random_anchor(problem.domain_y, rng)
        first = exact_saddle_bilinear(problem, ProxRegularizer(mu_x, mu_y, u1, v1))
        second = exact_saddle_bilinear(problem, ProxRegularizer(mu_x, mu_y, u2, v2))
        dx, dy = first.x - second.x, first.y - second.y
        du, dv = u1 - u2, v1 - v2
        lhs = mu_x * float(dx @ dx) + mu_y * float(dy @ dy)
        rhs = mu_x * float(du @ du) + mu_y * float(dv @ dv)
        worst = max(worst, lhs - rhs)
        if lhs > rhs + slack:
            violations += 1
    logger.info(f"Prox probe: {violations}/{pairs} violations, worst margin {worst:.3e}")
    return InequalityReport(
        name="prox_nonexpansive", trials=pairs, violations=violations, worst_margin=worst
    )
