"""Privacy budgets and the Gaussian mechanism."""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import ArgumentError


logger = logging.getLogger(__name__)

# Numerator c of the calibration sigma = sensitivity * sqrt(2 ln(c/delta)) / epsilon
GAUSSIAN_LOG_NUMERATOR = 1.25


class PrivacyBudget(BaseModel):
    """An (epsilon, delta) pair."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(gt=0, description="Privacy loss epsilon")
    delta: float = Field(gt=0, lt=1, description="Failure probability delta")

    def scaled(self, epsilon_factor: float, delta_factor: float) -> "PrivacyBudget":
        """Budget with epsilon and delta multiplied by the given factors."""
        return PrivacyBudget(
            epsilon=self.epsilon * epsilon_factor, delta=self.delta * delta_factor
        )

    def check_regime(self, n: int) -> None:
        """
        Check the high-privacy regime epsilon <= 1 and delta < 1/n the guarantees assume.

        Raises:
            ArgumentError: If either bound fails for a dataset of n samples
        """
        if self.epsilon > 1.0:
            raise ArgumentError(f"epsilon = {self.epsilon} is outside the supported range (0, 1]")
        if self.delta >= 1.0 / n:
            raise ArgumentError(
                f"delta = {self.delta} must be below 1/n = {1.0 / n:.6g} for n = {n}"
            )


def gaussian_sigma(sensitivity: float, budget: PrivacyBudget) -> float:
    """
    Noise scale of the Gaussian mechanism.

    Args:
        sensitivity: L2 sensitivity of the released quantity
        budget: Calibration budget

    Returns:
        sensitivity * sqrt(2 ln(1.25/delta)) / epsilon

    Raises:
        ArgumentError: If the sensitivity is negative
    """
    if sensitivity < 0:
        raise ArgumentError(f"Sensitivity must be non-negative, got {sensitivity}")
    if sensitivity == 0:
        return 0.0
    return sensitivity * math.sqrt(2.0 * math.log(GAUSSIAN_LOG_NUMERATOR / budget.delta)) / (
        budget.epsilon
    )


def add_gaussian_noise(point: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Return point + N(0, sigma^2 I) drawn from rng; sigma = 0 returns a copy of point."""
    if sigma < 0:
        raise ArgumentError(f"Noise scale must be non-negative, got {sigma}")
    point = np.asarray(point, dtype=float)
    if sigma == 0:
        return point.copy()
    return point + rng.normal(0.0, sigma, size=point.shape)
