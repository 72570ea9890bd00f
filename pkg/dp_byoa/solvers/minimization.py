"""SGD, SVRG and SARAH on regularized finite sums over a ball."""

import logging
from typing import Optional

import numpy as np

from ..problems.base import MinProblem
from .base import (
    BaseMinSolver,
    MinRegularizer,
    MinSolveResult,
    MinSolverKind,
    MinSolverSpec,
)


logger = logging.getLogger(__name__)


class SgdSolver(BaseMinSolver):
    """Random-reshuffling SGD with step 1/(mu t), t restarting every epoch."""

    @property
    def kind(self) -> MinSolverKind:
        return MinSolverKind.SGD

    @property
    def epoch_cost(self) -> int:
        return self.problem.n

    def _epoch(self, x: np.ndarray, sample_grads: np.ndarray, full_grad: np.ndarray) -> np.ndarray:
        domain = self.problem.domain
        scale = 1.0 if self.spec.step_size is None else self.spec.step_size * self.mu
        for t, i in enumerate(self.rng.permutation(self.problem.n), start=1):
            g = self._component_grad(x, int(i)) + self.regularizer.grad(x)
            x = domain.project(x - (scale / (self.mu * t)) * g)
        return x


class SvrgSolver(BaseMinSolver):
    """SVRG with stored snapshot gradients, step 1/(4 l) and m = max(n, 8 kappa) inner steps."""

    @property
    def kind(self) -> MinSolverKind:
        return MinSolverKind.SVRG

    @property
    def epoch_cost(self) -> int:
        return self.inner_length

    def _epoch(self, x: np.ndarray, sample_grads: np.ndarray, full_grad: np.ndarray) -> np.ndarray:
        domain = self.problem.domain
        step = self.spec.step_size or 1.0 / (4.0 * self.smoothness)
        snapshot_mean = full_grad - self.regularizer.grad(x)
        for i in self.rng.integers(self.problem.n, size=self.inner_length):
            i = int(i)
            v = (
                self._component_grad(x, i)
                - sample_grads[i]
                + snapshot_mean
                + self.regularizer.grad(x)
            )
            x = domain.project(x - step * v)
        return x


class SarahSolver(BaseMinSolver):
    """SARAH: recursive gradient estimate restarted from the full gradient every epoch."""

    @property
    def kind(self) -> MinSolverKind:
        return MinSolverKind.SARAH

    @property
    def epoch_cost(self) -> int:
        return 2 * (self.inner_length - 1)

    def _epoch(self, x: np.ndarray, sample_grads: np.ndarray, full_grad: np.ndarray) -> np.ndarray:
        domain = self.problem.domain
        step = self.spec.step_size or 1.0 / (4.0 * self.smoothness)
        v = full_grad
        previous = x
        x = domain.project(x - step * v)
        for i in self.rng.integers(self.problem.n, size=self.inner_length - 1):
            i = int(i)
            v = (
                self._component_grad(x, i)
                - self._component_grad(previous, i)
                + self.regularizer.grad(x)
                - self.regularizer.grad(previous)
                + v
            )
            previous = x
            x = domain.project(x - step * v)
        return x


SOLVERS: dict[MinSolverKind, type[BaseMinSolver]] = {
    MinSolverKind.SGD: SgdSolver,
    MinSolverKind.SVRG: SvrgSolver,
    MinSolverKind.SARAH: SarahSolver,
}


def solve_min(
    problem: MinProblem,
    spec: MinSolverSpec,
    regularizer: Optional[MinRegularizer] = None,
    x0: Optional[np.ndarray] = None,
    reference: Optional[np.ndarray] = None,
) -> MinSolveResult:
    """
    Minimize (1/n) sum_i f(x; xi_i) + regularizer(x) over the problem's ball.

    Args:
        problem: Finite-sum problem
        spec: Solver kind, target and budget
        regularizer: Optional anchor regularizer handled in closed form
        x0: Starting point; defaults to the projected anchor (domain center without one)
        reference: Known minimizer, used only to report the achieved suboptimality

    Returns:
        MinSolveResult whose point has certified suboptimality at most spec.target

    Raises:
        ArgumentError: If the effective modulus mu + mu_reg is not positive
        BudgetExceededError: If the gradient budget runs out first
    """
    solver = SOLVERS[spec.kind](problem, spec, regularizer)
    result = solver.solve(x0=x0, reference=reference)
    logger.debug(
        f"{spec.kind.value}: {result.epochs} epochs, {result.gradient_evals} gradient evaluations, "
        f"certificate {result.certificate:.3e}"
    )
    return result
