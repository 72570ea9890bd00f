"""Solver specs, results, regularizers and the shared epoch loop of every base solver."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import ArgumentError, BudgetExceededError
from ..problems.base import BallDomain, MinimaxProblem, MinProblem


logger = logging.getLogger(__name__)


class MinSolverKind(str, Enum):
    """Available finite-sum minimization solvers."""
    SGD = "sgd"
    SVRG = "svrg"
    SARAH = "sarah"


class MinimaxSolverKind(str, Enum):
    """Available saddle-point solvers."""
    GDA = "gda"
    EXTRAGRADIENT = "extragradient"
    SVRG_MINIMAX = "svrg_minimax"


# Multipliers of the theoretical gradient budget, per solver
DEFAULT_BUDGET_CONSTANTS: dict[Enum, float] = {
    MinSolverKind.SGD: 3.0,
    MinSolverKind.SVRG: 3.0,
    MinSolverKind.SARAH: 3.0,
    MinimaxSolverKind.GDA: 3.0,
    MinimaxSolverKind.EXTRAGRADIENT: 12.0,
    MinimaxSolverKind.SVRG_MINIMAX: 6.0,
}


class MinSolverSpec(BaseModel):
    """Configuration of a non-private minimization solver."""

    model_config = ConfigDict(frozen=True)

    kind: MinSolverKind = Field(default=MinSolverKind.SVRG, description="Solver algorithm")
    target: float = Field(default=1e-8, gt=0, description="Expected suboptimality target gamma")
    step_size: Optional[float] = Field(
        default=None, gt=0, description="Override of the per-kind default step size"
    )
    epoch_length: Optional[int] = Field(
        default=None, gt=0, description="Inner-loop length; defaults to max(n, ceil(8 kappa))"
    )
    max_gradient_evals: Optional[int] = Field(
        default=None, gt=0, description="Hard cap on per-sample gradient evaluations"
    )
    budget_constant: Optional[float] = Field(
        default=None, gt=0, description="Constant c of the theoretical budget"
    )
    seed: int = Field(default=0, ge=0, lt=2**64, description="Seed of the sampling stream")
    record_history: bool = Field(default=False, description="Keep every epoch's iterate")


class MinimaxSolverSpec(BaseModel):
    """Configuration of a non-private saddle-point solver."""

    model_config = ConfigDict(frozen=True)

    kind: MinimaxSolverKind = Field(
        default=MinimaxSolverKind.EXTRAGRADIENT, description="Solver algorithm"
    )
    target: float = Field(default=1e-8, gt=0, description="Expected accuracy target gamma")
    step_size: Optional[float] = Field(default=None, gt=0)
    epoch_length: Optional[int] = Field(default=None, gt=0)
    max_gradient_evals: Optional[int] = Field(default=None, gt=0)
    budget_constant: Optional[float] = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    record_history: bool = Field(default=False)


@dataclass(frozen=True, eq=False)
class MinRegularizer:
    """The anchor regularizer (mu/2)||x - anchor||^2."""

    mu: float
    anchor: np.ndarray

    def __post_init__(self) -> None:
        if self.mu < 0:
            raise ArgumentError(f"Regularizer modulus must be non-negative, got {self.mu}")
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float).reshape(-1))

    def value(self, x: np.ndarray) -> float:
        diff = x - self.anchor
        return 0.5 * self.mu * float(diff @ diff)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.mu * (x - self.anchor)


@dataclass(frozen=True, eq=False)
class ProxRegularizer:
    """(mu_x/2)||x - anchor_x||^2 - (mu_y/2)||y - anchor_y||^2 added to a saddle objective."""

    mu_x: float
    mu_y: float
    anchor_x: np.ndarray
    anchor_y: np.ndarray

    def __post_init__(self) -> None:
        if self.mu_x < 0 or self.mu_y < 0:
            raise ArgumentError("Regularizer moduli must be non-negative")
        object.__setattr__(self, "anchor_x", np.asarray(self.anchor_x, dtype=float).reshape(-1))
        object.__setattr__(self, "anchor_y", np.asarray(self.anchor_y, dtype=float).reshape(-1))

    @classmethod
    def zero(cls, dim_x: int, dim_y: int) -> "ProxRegularizer":
        return cls(0.0, 0.0, np.zeros(dim_x), np.zeros(dim_y))

    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        dx, dy = x - self.anchor_x, y - self.anchor_y
        return 0.5 * self.mu_x * float(dx @ dx) - 0.5 * self.mu_y * float(dy @ dy)

    def operator(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(grad_x, -grad_y) of the regularizer."""
        return self.mu_x * (x - self.anchor_x), self.mu_y * (y - self.anchor_y)


@dataclass
class MinSolveResult:
    """Output of a minimization solve."""

    point: np.ndarray
    gradient_evals: int
    certificate: float
    epochs: int
    achieved: Optional[float] = None
    history: list[np.ndarray] = field(default_factory=list)


@dataclass
class SaddleResult:
    """Output of a saddle-point solve."""

    x: np.ndarray
    y: np.ndarray
    gradient_evals: int
    certificate: float
    epochs: int
    evals_per_epoch: int
    achieved: Optional[float] = None
    history: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)


def strongly_convex_gap_bound(
    domain: BallDomain, x: np.ndarray, grad: np.ndarray, mu: float
) -> float:
    """
    Oracle-free bound on F(x) - min F for a mu-strongly convex F over a ball.

    Args:
        domain: Feasible ball
        x: Current point
        grad: Gradient of F at x
        mu: Strong-convexity modulus of F

    Returns:
        max over z in the ball of <grad, x - z> - (mu/2)||x - z||^2, attained at
        z = project(x - grad/mu)
    """
    z = domain.project(x - grad / mu)
    step = z - x
    return max(0.0, -(float(grad @ step) + 0.5 * mu * float(step @ step)))


def _log_factor(initial_gap: float, target: float) -> int:
    return int(math.ceil(math.log(initial_gap / target) - 1e-12))


def _check_budget_args(kappa: float, target: float, initial_gap: float) -> None:
    if kappa < 1 or target <= 0 or initial_gap <= 0:
        raise ArgumentError(
            f"Budget needs kappa >= 1, gamma > 0 and an initial gap > 0 "
            f"(got {kappa}, {target}, {initial_gap})"
        )


def iteration_budget_min(
    kind: MinSolverKind,
    n: int,
    kappa: float,
    target: float,
    initial_gap: float,
    constant: Optional[float] = None,
) -> int:
    """
    Theoretical gradient budget c (n + kappa) ceil(log(gap0/gamma)).

    Args:
        kind: Solver kind, selects the default constant
        n: Number of samples
        kappa: Condition number l/mu of the (regularized) objective
        target: Accuracy target gamma
        initial_gap: Suboptimality bound at the starting point
        constant: Override of the per-kind constant c

    Returns:
        Per-sample gradient evaluations beyond the initial full pass; 0 when gap0 <= gamma
    """
    _check_budget_args(kappa, target, initial_gap)
    if initial_gap <= target:
        return 0
    c = constant if constant is not None else DEFAULT_BUDGET_CONSTANTS[kind]
    return int(math.ceil(c * (n + kappa) * _log_factor(initial_gap, target)))


def iteration_budget_minimax(
    kind: MinimaxSolverKind,
    n: int,
    kappa: float,
    target: float,
    initial_gap: float,
    constant: Optional[float] = None,
) -> int:
    """c T(n, kappa) ceil(log(gap0/gamma)) with T = n kappa^2, n kappa or n + kappa^2."""
    _check_budget_args(kappa, target, initial_gap)
    if initial_gap <= target:
        return 0
    c = constant if constant is not None else DEFAULT_BUDGET_CONSTANTS[kind]
    if kind is MinimaxSolverKind.GDA:
        per_log = n * kappa**2
    elif kind is MinimaxSolverKind.EXTRAGRADIENT:
        per_log = n * kappa
    else:
        per_log = n + kappa**2
    return int(math.ceil(c * per_log * _log_factor(initial_gap, target)))


class BaseMinSolver(ABC):
    """Shared epoch loop: full gradient, certificate, stop or run one more epoch."""

    def __init__(
        self,
        problem: MinProblem,
        spec: MinSolverSpec,
        regularizer: Optional[MinRegularizer] = None,
    ):
        """
        Initialize the solver on a (possibly regularized) finite-sum problem.

        Args:
            problem: Finite-sum problem
            spec: Solver configuration
            regularizer: Optional anchor regularizer added analytically

        Raises:
            ArgumentError: If the effective strong convexity is not positive
        """
        self.problem = problem
        self.spec = spec
        self.regularizer = regularizer or MinRegularizer(0.0, problem.domain.center)
        if self.regularizer.anchor.shape[0] != problem.dimension:
            raise ArgumentError("Regularizer anchor dimension does not match the problem")
        self.mu = problem.constants.mu + self.regularizer.mu
        if self.mu <= 0:
            raise ArgumentError(
                "Effective strong convexity is zero; add a regularizer"
            )
        self.smoothness = problem.constants.smoothness + self.regularizer.mu
        self.kappa = max(1.0, self.smoothness / self.mu)
        self.rng = np.random.default_rng(spec.seed)

    @property
    @abstractmethod
    def kind(self) -> MinSolverKind:
        """Return the solver kind."""
        pass

    @property
    @abstractmethod
    def epoch_cost(self) -> int:
        """Per-sample gradient evaluations of one epoch, excluding the snapshot pass."""
        pass

    @abstractmethod
    def _epoch(self, x: np.ndarray, sample_grads: np.ndarray, full_grad: np.ndarray) -> np.ndarray:
        """Run one epoch from x given the per-sample gradients and full gradient at x."""
        pass

    @property
    def inner_length(self) -> int:
        if self.spec.epoch_length is not None:
            return self.spec.epoch_length
        return max(self.problem.n, int(math.ceil(8.0 * self.kappa)))

    def _full_gradient(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grads = self.problem.sample_grads(x)
        return grads, grads.mean(axis=0) + self.regularizer.grad(x)

    def _component_grad(self, x: np.ndarray, i: int) -> np.ndarray:
        return self.problem.grad(x, self.problem.samples[i])

    def objective(self, x: np.ndarray) -> float:
        return float(np.mean(self.problem.sample_losses(x))) + self.regularizer.value(x)

    def solve(
        self, x0: Optional[np.ndarray] = None, reference: Optional[np.ndarray] = None
    ) -> MinSolveResult:
        """
        Run epochs until the suboptimality certificate reaches the target.

        Args:
            x0: Starting point; defaults to the projected regularizer anchor
            reference: Known minimizer of the regularized objective, used to report
                the achieved suboptimality

        Returns:
            MinSolveResult with the certified point

        Raises:
            BudgetExceededError: If the gradient cap is hit first
        """
        n = self.problem.n
        domain = self.problem.domain
        x = domain.project(self.regularizer.anchor if x0 is None else x0)
        grads, full = self._full_gradient(x)
        evals = n
        certificate = strongly_convex_gap_bound(domain, x, full, self.mu)
        cap = self.spec.max_gradient_evals
        if cap is None:
            cap = n + iteration_budget_min(
                self.kind, n, self.kappa, self.spec.target, max(certificate, self.spec.target),
                self.spec.budget_constant,
            )
        elif cap < n:
            raise ArgumentError(f"Gradient budget {cap} is below one full pass over {n} samples")
        best_x, best_cert = x, certificate
        history = [x.copy()] if self.spec.record_history else []
        epochs = 0

        while certificate > self.spec.target:
            if evals + self.epoch_cost + n > cap:
                raise BudgetExceededError(
                    f"{self.kind.value}: gradient budget {cap} exhausted at certificate "
                    f"{best_cert:.3e} (target {self.spec.target:.3e})",
                    best_point=best_x,
                    gradient_evals=evals,
                    best_certificate=best_cert,
                )
            x = self._epoch(x, grads, full)
            grads, full = self._full_gradient(x)
            evals += self.epoch_cost + n
            epochs += 1
            certificate = strongly_convex_gap_bound(domain, x, full, self.mu)
            logger.debug(f"{self.kind.value} epoch {epochs}: certificate {certificate:.3e}")
            if certificate < best_cert:
                best_x, best_cert = x, certificate
            if self.spec.record_history:
                history.append(x.copy())

        achieved = None
        if reference is not None:
            achieved = self.objective(x) - self.objective(domain.check_point(reference))
        return MinSolveResult(
            point=x,
            gradient_evals=evals,
            certificate=certificate,
            epochs=epochs,
            achieved=achieved,
            history=history,
        )


class BaseSaddleSolver(ABC):
    """Shared epoch loop for saddle solvers on the monotone operator (grad_x, -grad_y)."""

    def __init__(
        self,
        problem: MinimaxProblem,
        spec: MinimaxSolverSpec,
        regularizer: Optional[ProxRegularizer] = None,
    ):
        self.problem = problem
        self.spec = spec
        self.regularizer = regularizer or ProxRegularizer.zero(problem.dim_x, problem.dim_y)
        if (
            self.regularizer.anchor_x.shape[0] != problem.dim_x
            or self.regularizer.anchor_y.shape[0] != problem.dim_y
        ):
            raise ArgumentError("Regularizer anchors do not match the problem dimensions")
        c = problem.constants
        self.mu_x = c.mu_x + self.regularizer.mu_x
        self.mu_y = c.mu_y + self.regularizer.mu_y
        if self.mu_x <= 0 or self.mu_y <= 0:
            raise ArgumentError(
                f"Effective moduli must be positive, got mu_x={self.mu_x}, mu_y={self.mu_y}"
            )
        self.mu = min(self.mu_x, self.mu_y)
        self.operator_smoothness = c.smoothness + max(self.regularizer.mu_x, self.regularizer.mu_y)
        self.kappa = max(1.0, self.operator_smoothness / self.mu)
        self.rng = np.random.default_rng(spec.seed)

    @property
    def budget_kappa(self) -> float:
        """Condition number the default gradient budget is computed from."""
        return self.kappa

    @property
    @abstractmethod
    def kind(self) -> MinimaxSolverKind:
        """Return the solver kind."""
        pass

    @property
    @abstractmethod
    def epoch_cost(self) -> int:
        pass

    @abstractmethod
    def _epoch(
        self,
        x: np.ndarray,
        y: np.ndarray,
        sample_ops: tuple[np.ndarray, np.ndarray],
        full_op: tuple[np.ndarray, np.ndarray],
    ) -> tuple[np.ndarray, np.ndarray]:
        """Run one epoch from (x, y) given per-sample and full operators at that point."""
        pass

    def _project(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.problem.domain_x.project(x), self.problem.domain_y.project(y)

    def _sample_operators(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-sample operator rows (grad_x f_i, -grad_y f_i) without the regularizer."""
        gx, gy = self.problem.sample_grads(x, y)
        return gx, -gy

    def _full_operator(
        self, x: np.ndarray, y: np.ndarray
    ) -> tuple[tuple[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]:
        ops = self._sample_operators(x, y)
        rx, ry = self.regularizer.operator(x, y)
        return ops, (ops[0].mean(axis=0) + rx, ops[1].mean(axis=0) + ry)

    def certificate(
        self, x: np.ndarray, y: np.ndarray, full_op: tuple[np.ndarray, np.ndarray]
    ) -> float:
        """
        Bound on mu_x||x - x*||^2 + mu_y||y - y*||^2 from the natural residual.

        Uses ||z - z*|| <= (1 + eta l)/(eta mu) ||z - P(z - eta F(z))|| with eta = 1/l.
        """
        eta = 1.0 / self.operator_smoothness
        px, py = self._project(x - eta * full_op[0], y - eta * full_op[1])
        residual_sq = float(np.sum((x - px) ** 2) + np.sum((y - py) ** 2))
        factor = (1.0 + eta * self.operator_smoothness) / (eta * self.mu)
        return max(self.mu_x, self.mu_y) * factor**2 * residual_sq

    def solve(
        self,
        x0: Optional[np.ndarray] = None,
        y0: Optional[np.ndarray] = None,
        reference: Optional[tuple[np.ndarray, np.ndarray]] = None,
    ) -> SaddleResult:
        """Run epochs until the weighted-distance certificate is at most twice the target."""
        n = self.problem.n
        target = 2.0 * self.spec.target
        x, y = self._project(
            self.regularizer.anchor_x if x0 is None else x0,
            self.regularizer.anchor_y if y0 is None else y0,
        )
        ops, full = self._full_operator(x, y)
        evals = n
        certificate = self.certificate(x, y, full)
        cap = self.spec.max_gradient_evals
        if cap is None:
            cap = n + iteration_budget_minimax(
                self.kind, n, self.budget_kappa, target, max(certificate, target),
                self.spec.budget_constant,
            )
        elif cap < n:
            raise ArgumentError(f"Gradient budget {cap} is below one full pass over {n} samples")
        best = (x, y, certificate)
        history = [(x.copy(), y.copy())] if self.spec.record_history else []
        epochs = 0

        while certificate > target:
            if evals + self.epoch_cost + n > cap:
                raise BudgetExceededError(
                    f"{self.kind.value}: gradient budget {cap} exhausted at certificate "
                    f"{best[2]:.3e} (target {target:.3e})",
                    best_point=best[0],
                    best_dual=best[1],
                    gradient_evals=evals,
                    best_certificate=best[2],
                )
            x, y = self._epoch(x, y, ops, full)
            ops, full = self._full_operator(x, y)
            evals += self.epoch_cost + n
            epochs += 1
            certificate = self.certificate(x, y, full)
            logger.debug(f"{self.kind.value} epoch {epochs}: certificate {certificate:.3e}")
            if certificate < best[2]:
                best = (x, y, certificate)
            if self.spec.record_history:
                history.append((x.copy(), y.copy()))

        achieved = None
        if reference is not None:
            rx, ry = reference
            achieved = self.mu_x * float(np.sum((x - rx) ** 2)) + self.mu_y * float(
                np.sum((y - ry) ** 2)
            )
        return SaddleResult(
            x=x,
            y=y,
            gradient_evals=evals,
            certificate=certificate,
            epochs=epochs,
            evals_per_epoch=self.epoch_cost + n,
            achieved=achieved,
            history=history,
        )
