"""Non-private base solvers for minimization and saddle problems."""

from .base import (
    DEFAULT_BUDGET_CONSTANTS,
    BaseMinSolver,
    BaseSaddleSolver,
    MinimaxSolverKind,
    MinimaxSolverSpec,
    MinRegularizer,
    MinSolveResult,
    MinSolverKind,
    MinSolverSpec,
    ProxRegularizer,
    SaddleResult,
    iteration_budget_min,
    iteration_budget_minimax,
    strongly_convex_gap_bound,
)
from .minimax import (
    ExtragradientSolver,
    GdaSolver,
    SvrgMinimaxSolver,
    prox_quadratic,
    solve_saddle,
)
from .minimization import SarahSolver, SgdSolver, SvrgSolver, solve_min

__all__ = [
    "DEFAULT_BUDGET_CONSTANTS",
    "BaseMinSolver",
    "BaseSaddleSolver",
    "ExtragradientSolver",
    "GdaSolver",
    "MinimaxSolverKind",
    "MinimaxSolverSpec",
    "MinRegularizer",
    "MinSolveResult",
    "MinSolverKind",
    "MinSolverSpec",
    "ProxRegularizer",
    "SaddleResult",
    "SarahSolver",
    "SgdSolver",
    "SvrgMinimaxSolver",
    "SvrgSolver",
    "iteration_budget_min",
    "iteration_budget_minimax",
    "prox_quadratic",
    "solve_min",
    "solve_saddle",
    "strongly_convex_gap_bound",
]
