"""GDA, Extragradient and variance-reduced extragradient for smooth saddle problems."""

import logging
from typing import Optional

import numpy as np

from ..exceptions import ArgumentError
from ..problems.base import BallDomain, MinimaxProblem
from .base import (
    BaseSaddleSolver,
    MinimaxSolverKind,
    MinimaxSolverSpec,
    ProxRegularizer,
    SaddleResult,
)


logger = logging.getLogger(__name__)

Pair = tuple[np.ndarray, np.ndarray]


def prox_quadratic(
    reg: ProxRegularizer,
    point: tuple[np.ndarray, np.ndarray],
    step: float,
    domain_x: Optional[BallDomain] = None,
    domain_y: Optional[BallDomain] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Exact proximal step of a quadratic-anchor regularizer.

    Args:
        reg: Regularizer (mu_x/2)||x - a_x||^2 - (mu_y/2)||y - a_y||^2
        point: The gradient-step pair (x', y')
        step: Step lambda > 0
        domain_x: Optional ball the x result is projected onto
        domain_y: Optional ball the y result is projected onto

    Returns:
        ((x' + lambda mu_x a_x)/(1 + lambda mu_x), (y' + lambda mu_y a_y)/(1 + lambda mu_y)),
        projected when domains are given
    """
    if step <= 0:
        raise ArgumentError(f"Prox step must be positive, got {step}")
    xp, yp = point
    x = (xp + step * reg.mu_x * reg.anchor_x) / (1.0 + step * reg.mu_x)
    y = (yp + step * reg.mu_y * reg.anchor_y) / (1.0 + step * reg.mu_y)
    if domain_x is not None:
        x = domain_x.project(x)
    if domain_y is not None:
        y = domain_y.project(y)
    return x, y


class GdaSolver(BaseSaddleSolver):
    """Full-batch simultaneous gradient descent-ascent with step mu/l^2."""

    @property
    def kind(self) -> MinimaxSolverKind:
        return MinimaxSolverKind.GDA

    @property
    def epoch_cost(self) -> int:
        return 0

    def _epoch(
        self, x: np.ndarray, y: np.ndarray, sample_ops: Pair, full_op: Pair
    ) -> Pair:
        step = self.spec.step_size or self.mu / self.operator_smoothness**2
        return self._project(x - step * full_op[0], y - step * full_op[1])


class ExtragradientSolver(BaseSaddleSolver):
    """Full-batch projected extragradient with step 1/(4 l)."""

    @property
    def kind(self) -> MinimaxSolverKind:
        return MinimaxSolverKind.EXTRAGRADIENT

    @property
    def epoch_cost(self) -> int:
        return self.problem.n

    def _epoch(
        self, x: np.ndarray, y: np.ndarray, sample_ops: Pair, full_op: Pair
    ) -> Pair:
        step = self.spec.step_size or 1.0 / (4.0 * self.operator_smoothness)
        xh, yh = self._project(x - step * full_op[0], y - step * full_op[1])
        _, (hx, hy) = self._full_operator(xh, yh)
        return self._project(x - step * hx, y - step * hy)


class SvrgMinimaxSolver(BaseSaddleSolver):
    """
    Variance-reduced extragradient with an exact prox on the regularizer.

    Each epoch keeps the per-sample operators at the snapshot and takes n inner
    extragradient steps, each half step using one fresh sample. The step 1/(8 l)
    uses the smoothness of f alone, so the regularizer modulus never changes
    the step or the per-epoch gradient count.
    """

    @property
    def kind(self) -> MinimaxSolverKind:
        return MinimaxSolverKind.SVRG_MINIMAX

    @property
    def budget_kappa(self) -> float:
        # f constants only when f is strongly monotone; the prox handles the regularizer
        c = self.problem.constants
        modulus = min(c.mu_x, c.mu_y)
        if modulus <= 0:
            return max(1.0, c.smoothness / self.mu)
        return max(1.0, c.smoothness / modulus)

    @property
    def inner_length(self) -> int:
        return self.spec.epoch_length or self.problem.n

    @property
    def epoch_cost(self) -> int:
        return 2 * self.inner_length

    def _sample_operator(self, x: np.ndarray, y: np.ndarray, i: int) -> Pair:
        xi = self.problem.samples[i]
        return self.problem.grad_x(x, y, xi), -self.problem.grad_y(x, y, xi)

    def _epoch(
        self, x: np.ndarray, y: np.ndarray, sample_ops: Pair, full_op: Pair
    ) -> Pair:
        step = self.spec.step_size or 1.0 / (8.0 * self.problem.constants.smoothness)
        ops_x, ops_y = sample_ops
        rx, ry = self.regularizer.operator(x, y)
        mean_x, mean_y = full_op[0] - rx, full_op[1] - ry
        domains = (self.problem.domain_x, self.problem.domain_y)
        reg = self.regularizer

        def estimate(u: np.ndarray, v: np.ndarray, i: int) -> Pair:
            gx, gy = self._sample_operator(u, v, i)
            return gx - ops_x[i] + mean_x, gy - ops_y[i] + mean_y

        for _ in range(self.inner_length):
            i, j = (int(k) for k in self.rng.integers(self.problem.n, size=2))
            gx, gy = estimate(x, y, i)
            xh, yh = prox_quadratic(reg, (x - step * gx, y - step * gy), step, *domains)
            gx, gy = estimate(xh, yh, j)
            x, y = prox_quadratic(reg, (x - step * gx, y - step * gy), step, *domains)
        return x, y


SOLVERS: dict[MinimaxSolverKind, type[BaseSaddleSolver]] = {
    MinimaxSolverKind.GDA: GdaSolver,
    MinimaxSolverKind.EXTRAGRADIENT: ExtragradientSolver,
    MinimaxSolverKind.SVRG_MINIMAX: SvrgMinimaxSolver,
}


def solve_saddle(
    problem: MinimaxProblem,
    spec: MinimaxSolverSpec,
    reg: Optional[ProxRegularizer] = None,
    x0: Optional[np.ndarray] = None,
    y0: Optional[np.ndarray] = None,
    reference: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> SaddleResult:
    """
    Approximate the saddle point of (1/n) sum_i f(x, y; xi_i) + reg(x, y).

    Args:
        problem: Finite-sum saddle problem
        spec: Solver kind, target and budget
        reg: Optional quadratic-anchor regularizer
        x0: Starting x; defaults to the projected x anchor
        y0: Starting y; defaults to the projected y anchor
        reference: Known saddle point, used only to report the achieved weighted distance

    Returns:
        SaddleResult whose certified weighted distance to the saddle is at most 2 * spec.target

    Raises:
        ArgumentError: If an effective modulus is not positive
        BudgetExceededError: If the gradient budget runs out first
    """
    solver = SOLVERS[spec.kind](problem, spec, reg)
    result = solver.solve(x0=x0, y0=y0, reference=reference)
    logger.debug(
        f"{spec.kind.value}: {result.epochs} epochs, {result.gradient_evals} gradient evaluations, "
        f"certificate {result.certificate:.3e}"
    )
    return result
