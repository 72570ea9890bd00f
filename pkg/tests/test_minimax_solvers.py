"""Tests for the saddle-point solvers."""

import numpy as np
import pytest

from dp_byoa.exceptions import ArgumentError, BudgetExceededError
from dp_byoa.oracle import exact_saddle_bilinear
from dp_byoa.problems import BallDomain, BilinearFamily
from dp_byoa.solvers import (
    MinimaxSolverKind,
    MinimaxSolverSpec,
    ProxRegularizer,
    iteration_budget_minimax,
    prox_quadratic,
    SvrgMinimaxSolver,
    solve_saddle,
)


def _weighted_distance(result, saddle, mu_x, mu_y):
    return mu_x * float(np.sum((result.x - saddle.x) ** 2)) + mu_y * float(
        np.sum((result.y - saddle.y) ** 2)
    )


class TestSolveSaddle:
    """Test cases for solve_saddle on bilinear problems."""

    @pytest.fixture
    def family(self):
        return BilinearFamily.random(2, 2, np.random.default_rng(0), mu_x=1.0, mu_y=0.8)

    @pytest.fixture
    def problem(self, family):
        return family.make_problem(family.sample(20, np.random.default_rng(1)))

    @pytest.mark.parametrize("kind", list(MinimaxSolverKind))
    def test_reaches_target(self, problem, kind):
        """The certified weighted distance is at most twice the target, and so is the true one."""
        saddle = exact_saddle_bilinear(problem)
        spec = MinimaxSolverSpec(kind=kind, target=1e-7, seed=5)
        result = solve_saddle(problem, spec, reference=(saddle.x, saddle.y))

        assert result.certificate <= 2e-7
        assert result.achieved <= 2e-7 + 1e-12
        assert _weighted_distance(result, saddle, 1.0, 0.8) == pytest.approx(result.achieved)

    @pytest.mark.parametrize("kind", list(MinimaxSolverKind))
    def test_regularized_matches_oracle(self, problem, kind):
        reg = ProxRegularizer(0.5, 0.5, np.array([1.0, 0.0]), np.array([0.0, -1.0]))
        saddle = exact_saddle_bilinear(problem, reg)
        result = solve_saddle(problem, MinimaxSolverSpec(kind=kind, target=1e-8), reg)

        assert _weighted_distance(result, saddle, 1.5, 1.3) <= 2e-8 + 1e-12

    def test_starting_point(self, problem):
        """Starting at the saddle needs no epoch."""
        saddle = exact_saddle_bilinear(problem)
        result = solve_saddle(problem, MinimaxSolverSpec(target=1e-6), x0=saddle.x, y0=saddle.y)

        assert result.epochs == 0
        assert result.gradient_evals == problem.n

    def test_evals_per_epoch(self, problem):
        spec = MinimaxSolverSpec(kind=MinimaxSolverKind.GDA, target=1e-6)
        result = solve_saddle(problem, spec)

        assert result.gradient_evals == problem.n + result.epochs * result.evals_per_epoch

    def test_budget_exceeded_carries_both_sides(self, problem):
        spec = MinimaxSolverSpec(target=1e-12, max_gradient_evals=problem.n)

        with pytest.raises(BudgetExceededError) as info:
            solve_saddle(problem, spec)
        assert info.value.best_point.shape == (2,)
        assert info.value.best_dual.shape == (2,)

    def test_requires_positive_moduli(self):
        """A convex-concave problem needs a regularizer on both sides."""
        family = BilinearFamily.random(2, 2, np.random.default_rng(2), mu_x=0.0, mu_y=0.0)
        problem = family.make_problem(family.sample(10, np.random.default_rng(3)))

        with pytest.raises(ArgumentError):
            solve_saddle(problem, MinimaxSolverSpec())

        reg = ProxRegularizer(0.5, 0.5, np.zeros(2), np.zeros(2))
        result = solve_saddle(problem, MinimaxSolverSpec(target=1e-6), reg)
        assert result.certificate <= 2e-6

    def test_same_seed_same_point(self, problem):
        spec = MinimaxSolverSpec(kind=MinimaxSolverKind.SVRG_MINIMAX, target=1e-6, seed=9)
        first = solve_saddle(problem, spec)
        second = solve_saddle(problem, spec)

        assert np.array_equal(first.x, second.x)
        assert np.array_equal(first.y, second.y)

    def test_svrg_budget_ignores_regularizer_modulus(self, problem):
        """Doubling both regularizer moduli leaves the epoch cost and the budget unchanged."""
        spec = MinimaxSolverSpec(kind=MinimaxSolverKind.SVRG_MINIMAX, target=1e-6)
        anchors = (np.array([0.3, -0.2]), np.array([0.1, 0.4]))
        single = SvrgMinimaxSolver(problem, spec, ProxRegularizer(0.5, 0.5, *anchors))
        double = SvrgMinimaxSolver(problem, spec, ProxRegularizer(1.0, 1.0, *anchors))

        assert single.epoch_cost == double.epoch_cost == 2 * problem.n
        assert single.budget_kappa == double.budget_kappa
        budgets = [
            iteration_budget_minimax(s.kind, problem.n, s.budget_kappa, 1e-6, 1.0)
            for s in (single, double)
        ]
        assert budgets[0] == budgets[1]


class TestProxQuadratic:
    """Test cases for the closed-form proximal step."""

    def test_closed_form(self):
        reg = ProxRegularizer(2.0, 1.0, np.array([1.0]), np.array([-1.0]))
        x, y = prox_quadratic(reg, (np.array([3.0]), np.array([3.0])), 0.5)

        assert x == pytest.approx([(3.0 + 0.5 * 2.0 * 1.0) / 2.0])
        assert y == pytest.approx([(3.0 - 0.5) / 1.5])

    def test_projects_onto_domains(self):
        reg = ProxRegularizer.zero(2, 2)
        domain = BallDomain.centered(2, 1.0)
        x, y = prox_quadratic(reg, (np.array([3.0, 4.0]), np.zeros(2)), 1.0, domain, domain)

        assert np.allclose(x, [0.6, 0.8])
        assert np.allclose(y, 0.0)

    def test_rejects_non_positive_step(self):
        with pytest.raises(ArgumentError):
            prox_quadratic(ProxRegularizer.zero(1, 1), (np.zeros(1), np.zeros(1)), 0.0)


class TestMinimaxBudgets:
    """Test cases for the per-solver gradient budgets."""

    @pytest.mark.parametrize(
        "kind, per_log",
        [
            (MinimaxSolverKind.GDA, 3.0 * 10 * 4.0),
            (MinimaxSolverKind.EXTRAGRADIENT, 12.0 * 10 * 2.0),
            (MinimaxSolverKind.SVRG_MINIMAX, 6.0 * (10 + 4.0)),
        ],
    )
    def test_budget_formula(self, kind, per_log):
        """Per-log cost n kappa^2, n kappa and n + kappa^2 times the default constant."""
        budget = iteration_budget_minimax(kind, 10, 2.0, 0.01, 1.0)

        assert budget == int(np.ceil(per_log * 5))
