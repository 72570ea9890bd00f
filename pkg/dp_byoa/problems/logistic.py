"""Ridge-regularized logistic regression with samples encoded as [features, label]."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from ..exceptions import ArgumentError
from .base import BallDomain, MinConstants, MinProblem, SampleSet


@dataclass(frozen=True)
class LogisticStructure:
    ridge: float
    feature_radius: float


def make_logistic_min_problem(
    samples: SampleSet,
    domain: BallDomain,
    ridge: float = 0.0,
    feature_radius: Optional[float] = None,
) -> MinProblem:
    """
    Build log(1 + exp(-b <a, x>)) + (ridge/2)||x||^2 from samples (a, b).

    Args:
        samples: Rows [a_1 .. a_d, b] with b in {-1, +1}
        domain: Ball of dimension d
        ridge: Non-negative ridge modulus
        feature_radius: Certified bound R on ||a||; defaults to the largest feature norm

    Returns:
        MinProblem with L = R + ridge * D and smoothness R^2/4 + ridge

    Raises:
        ArgumentError: If the encoding is malformed or ridge is negative
    """
    if ridge < 0:
        raise ArgumentError(f"Ridge modulus must be non-negative, got {ridge}")
    if samples.dimension != domain.dimension + 1:
        raise ArgumentError(
            f"Logistic samples need {domain.dimension + 1} columns (features + label), "
            f"got {samples.dimension}"
        )
    labels = samples.data[:, -1]
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ArgumentError("Logistic labels must be encoded as -1 or +1 in the last column")
    norms = np.linalg.norm(samples.data[:, :-1], axis=1)
    if feature_radius is None:
        feature_radius = float(norms.max())
    elif np.any(norms > feature_radius * (1.0 + 1e-12)):
        raise ArgumentError(f"Features exceed the declared radius {feature_radius}")

    def loss(x: np.ndarray, xi: np.ndarray) -> float:
        margin = xi[-1] * float(xi[:-1] @ x)
        return float(np.logaddexp(0.0, -margin)) + 0.5 * ridge * float(x @ x)

    def grad(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        margin = xi[-1] * float(xi[:-1] @ x)
        return -xi[-1] * float(expit(-margin)) * xi[:-1] + ridge * x

    def batch_loss(x: np.ndarray, data: np.ndarray) -> np.ndarray:
        margins = data[:, -1] * (data[:, :-1] @ x)
        return np.logaddexp(0.0, -margins) + 0.5 * ridge * float(x @ x)

    def batch_grad(x: np.ndarray, data: np.ndarray) -> np.ndarray:
        margins = data[:, -1] * (data[:, :-1] @ x)
        weights = -data[:, -1] * expit(-margins)
        return weights[:, None] * data[:, :-1] + ridge * x

    return MinProblem(
        samples=samples,
        loss=loss,
        grad=grad,
        domain=domain,
        constants=MinConstants(
            lipschitz=feature_radius + ridge * domain.norm_bound,
            smoothness=feature_radius**2 / 4.0 + ridge,
            mu=ridge,
        ),
        family="logistic",
        structure=LogisticStructure(ridge=ridge, feature_radius=float(feature_radius)),
        batch_loss=batch_loss,
        batch_grad=batch_grad,
    )
