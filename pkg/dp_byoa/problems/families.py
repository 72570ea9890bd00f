"""Synthetic problem families with known population parameters."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import ArgumentError, NotSupportedError
from .base import BallDomain, MinimaxProblem, MinProblem, Problem, SampleSet, sample_in_ball
from .bilinear import encode_bilinear_samples, make_bilinear_saddle_problem
from .logistic import make_logistic_min_problem
from .quadratic import make_quadratic_min_problem


logger = logging.getLogger(__name__)


class ProblemFamily(ABC):
    """A data distribution together with the problem built from its samples."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the family name used in configs and records."""
        pass

    @property
    @abstractmethod
    def is_minimax(self) -> bool:
        pass

    @abstractmethod
    def sample(self, n: int, rng: np.random.Generator) -> SampleSet:
        """Draw n i.i.d. samples."""
        pass

    @abstractmethod
    def make_problem(self, samples: SampleSet) -> Problem:
        """Build the finite-sum problem over the given samples."""
        pass

    @property
    def dimension(self) -> int:
        """Total optimization dimension (d, or max(d_x, d_y) for saddles)."""
        raise NotImplementedError

    def population_optimum(self) -> np.ndarray:
        raise NotSupportedError(f"Family '{self.name}' has no closed-form population optimum")

    def population_excess_risk(self, x: np.ndarray) -> float:
        raise NotSupportedError(f"Family '{self.name}' has no closed-form population risk")

    def population_problem(self) -> MinimaxProblem:
        raise NotSupportedError(f"Family '{self.name}' has no closed-form population objective")


@dataclass
class QuadraticFamily(ProblemFamily):
    """
    xi uniform in a ball of radius `spread` around a known mean.

    The population objective is (mu/2)(||x - mean||^2 + E||xi - mean||^2), so its
    minimizer over the domain is the projected mean and excess risk is closed form.
    """

    dim: int
    mu: float = 1.0
    mean: Optional[np.ndarray] = None
    spread: float = 1.0
    domain_radius: float = 2.0

    def __post_init__(self) -> None:
        if self.dim < 1 or self.mu <= 0 or self.spread < 0:
            raise ArgumentError("Quadratic family needs dim >= 1, mu > 0, spread >= 0")
        if self.mean is None:
            self.mean = np.full(self.dim, 0.3 / np.sqrt(self.dim))
        self.mean = np.asarray(self.mean, dtype=float).reshape(-1)
        if self.mean.shape[0] != self.dim:
            raise ArgumentError("Population mean dimension does not match the family dimension")
        self.domain = BallDomain.centered(self.dim, self.domain_radius)
        self.data_radius = float(np.linalg.norm(self.mean)) + self.spread

    @property
    def name(self) -> str:
        return "quadratic"

    @property
    def is_minimax(self) -> bool:
        return False

    @property
    def dimension(self) -> int:
        return self.dim

    def sample(self, n: int, rng: np.random.Generator) -> SampleSet:
        if self.spread == 0:
            return SampleSet(np.tile(self.mean, (n, 1)))
        return SampleSet(sample_in_ball(BallDomain(self.mean, self.spread), rng, n))

    def make_problem(self, samples: SampleSet) -> MinProblem:
        return make_quadratic_min_problem(
            samples, self.mu, self.domain, data_radius=self.data_radius
        )

    def population_optimum(self) -> np.ndarray:
        return self.domain.project(self.mean)

    def population_excess_risk(self, x: np.ndarray) -> float:
        """F(x) - min F in closed form."""
        x = self.domain.check_point(x)
        opt = self.population_optimum()
        return 0.5 * self.mu * (
            float(np.sum((x - self.mean) ** 2)) - float(np.sum((opt - self.mean) ** 2))
        )


@dataclass
class LogisticFamily(ProblemFamily):
    """Features uniform in a ball, labels from a planted direction with flip noise."""

    dim: int
    ridge: float = 0.0
    feature_radius: float = 1.0
    label_noise: float = 0.1
    domain_radius: float = 2.0
    direction: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.label_noise < 0.5:
            raise ArgumentError("Label noise must lie in [0, 0.5)")
        if self.direction is None:
            self.direction = np.ones(self.dim) / np.sqrt(self.dim)
        self.direction = np.asarray(self.direction, dtype=float).reshape(-1)
        self.domain = BallDomain.centered(self.dim, self.domain_radius)
        self._features = BallDomain.centered(self.dim, self.feature_radius)

    @property
    def name(self) -> str:
        return "logistic"

    @property
    def is_minimax(self) -> bool:
        return False

    @property
    def dimension(self) -> int:
        return self.dim

    def sample(self, n: int, rng: np.random.Generator) -> SampleSet:
        features = sample_in_ball(self._features, rng, n)
        labels = np.where(features @ self.direction >= 0.0, 1.0, -1.0)
        flips = rng.random(n) < self.label_noise
        labels[flips] *= -1.0
        return SampleSet(np.hstack([features, labels[:, None]]))

    def make_problem(self, samples: SampleSet) -> MinProblem:
        return make_logistic_min_problem(
            samples, self.domain, ridge=self.ridge, feature_radius=self.feature_radius
        )


@dataclass
class BilinearFamily(ProblemFamily):
    """A_i = A_bar + noise, b_i = b_bar + noise with entrywise noise uniform in [-scale, scale]."""

    matrix_mean: np.ndarray
    offset_mean: np.ndarray
    mu_x: float = 1.0
    mu_y: float = 1.0
    noise_scale: float = 0.1
    domain_radius_x: float = 2.0
    domain_radius_y: float = 2.0
    domain_x: BallDomain = field(init=False)
    domain_y: BallDomain = field(init=False)

    def __post_init__(self) -> None:
        self.matrix_mean = np.atleast_2d(np.asarray(self.matrix_mean, dtype=float))
        self.offset_mean = np.asarray(self.offset_mean, dtype=float).reshape(-1)
        dim_y, dim_x = self.matrix_mean.shape
        if self.offset_mean.shape[0] != dim_y:
            raise ArgumentError("Offset mean must have one entry per row of the matrix mean")
        self.domain_x = BallDomain.centered(dim_x, self.domain_radius_x)
        self.domain_y = BallDomain.centered(dim_y, self.domain_radius_y)
        self.matrix_bound = float(np.linalg.norm(self.matrix_mean, ord=2)) + self.noise_scale * (
            np.sqrt(dim_x * dim_y)
        )
        self.offset_bound = float(np.linalg.norm(self.offset_mean)) + self.noise_scale * np.sqrt(
            dim_y
        )

    @classmethod
    def random(
        cls,
        dim_x: int,
        dim_y: int,
        rng: np.random.Generator,
        mu_x: float = 1.0,
        mu_y: float = 1.0,
        noise_scale: float = 0.1,
        scale: float = 0.5,
        domain_radius: float = 2.0,
    ) -> "BilinearFamily":
        """Family with population means drawn once from `rng`."""
        return cls(
            matrix_mean=scale * rng.uniform(-1.0, 1.0, (dim_y, dim_x)),
            offset_mean=scale * rng.uniform(-1.0, 1.0, dim_y),
            mu_x=mu_x,
            mu_y=mu_y,
            noise_scale=noise_scale,
            domain_radius_x=domain_radius,
            domain_radius_y=domain_radius,
        )

    @property
    def name(self) -> str:
        return "bilinear"

    @property
    def is_minimax(self) -> bool:
        return True

    @property
    def dim_x(self) -> int:
        return int(self.matrix_mean.shape[1])

    @property
    def dim_y(self) -> int:
        return int(self.matrix_mean.shape[0])

    @property
    def dimension(self) -> int:
        return max(self.dim_x, self.dim_y)

    def sample(self, n: int, rng: np.random.Generator) -> SampleSet:
        matrices = self.matrix_mean + self.noise_scale * rng.uniform(
            -1.0, 1.0, (n, self.dim_y, self.dim_x)
        )
        offsets = self.offset_mean + self.noise_scale * rng.uniform(-1.0, 1.0, (n, self.dim_y))
        return encode_bilinear_samples(matrices, offsets)

    def make_problem(self, samples: SampleSet) -> MinimaxProblem:
        split = self.dim_x * self.dim_y
        return make_bilinear_saddle_problem(
            samples.data[:, :split].reshape(-1, self.dim_y, self.dim_x),
            samples.data[:, split:],
            self.mu_x,
            self.mu_y,
            self.domain_x,
            self.domain_y,
            matrix_bound=self.matrix_bound,
            offset_bound=self.offset_bound,
        )

    def population_problem(self) -> MinimaxProblem:
        """The population objective, which is the problem built on the mean sample."""
        return make_bilinear_saddle_problem(
            self.matrix_mean[None, :, :],
            self.offset_mean[None, :],
            self.mu_x,
            self.mu_y,
            self.domain_x,
            self.domain_y,
            matrix_bound=self.matrix_bound,
            offset_bound=self.offset_bound,
        )
