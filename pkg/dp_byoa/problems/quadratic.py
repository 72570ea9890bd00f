"""Quadratic test problem f(x; xi) = (mu/2)||x - xi||^2."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..exceptions import ArgumentError
from .base import BallDomain, MinConstants, MinProblem, SampleSet


@dataclass(frozen=True)
class QuadraticStructure:
    mu: float
    data_radius: float


def make_quadratic_min_problem(
    samples: SampleSet,
    mu: float,
    domain: BallDomain,
    data_radius: Optional[float] = None,
) -> MinProblem:
    """
    Build the quadratic problem whose empirical minimizer is the projected sample mean.

    Args:
        samples: Data points xi_i
        mu: Curvature, also the smoothness and strong-convexity modulus
        domain: Ball the iterates live in
        data_radius: Certified bound R on ||xi||; defaults to the largest sample norm

    Returns:
        MinProblem with L = mu (D + ||center|| + R), smoothness mu, modulus mu

    Raises:
        ArgumentError: If mu <= 0, dimensions differ, or a sample exceeds data_radius
    """
    if mu <= 0:
        raise ArgumentError(f"Quadratic curvature must be positive, got {mu}")
    if samples.dimension != domain.dimension:
        raise ArgumentError(
            f"Samples have dimension {samples.dimension}, domain has {domain.dimension}"
        )
    norms = np.linalg.norm(samples.data, axis=1)
    if data_radius is None:
        data_radius = float(norms.max())
    elif np.any(norms > data_radius * (1.0 + 1e-12)):
        raise ArgumentError(f"Samples exceed the declared data radius {data_radius}")

    def loss(x: np.ndarray, xi: np.ndarray) -> float:
        diff = x - xi
        return 0.5 * mu * float(diff @ diff)

    def grad(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return mu * (x - xi)

    def batch_loss(x: np.ndarray, data: np.ndarray) -> np.ndarray:
        return 0.5 * mu * np.sum((x - data) ** 2, axis=1)

    def batch_grad(x: np.ndarray, data: np.ndarray) -> np.ndarray:
        return mu * (x - data)

    return MinProblem(
        samples=samples,
        loss=loss,
        grad=grad,
        domain=domain,
        constants=MinConstants(
            lipschitz=mu * (domain.norm_bound + data_radius), smoothness=mu, mu=mu
        ),
        family="quadratic",
        structure=QuadraticStructure(mu=mu, data_radius=float(data_radius)),
        batch_loss=batch_loss,
        batch_grad=batch_grad,
    )
