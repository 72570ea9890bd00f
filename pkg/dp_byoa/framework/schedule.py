"""Phase schedules and default regularization for the phased algorithms."""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..exceptions import ArgumentError
from ..problems.base import block_bounds
from ..privacy.mechanisms import PrivacyBudget, gaussian_sigma


class ScheduleMode(str, Enum):
    """Which phased algorithm a schedule drives."""
    CONVEX_MIN = "convex_min"
    CONVEX_CONCAVE = "convex_concave"
    CSC = "csc"


@dataclass(frozen=True)
class Phase:
    """One phase: block [start, stop), regularizer mu_k, noise sigma_k, target gamma_k."""

    index: int
    start: int
    stop: int
    mu: float
    sigma: float
    target: float
    sensitivity: float

    @property
    def size(self) -> int:
        return self.stop - self.start


@dataclass(frozen=True)
class PhaseSchedule:
    """The (K, block sizes, mu_k, sigma_k, gamma_k) plan of a phased run."""

    n: int
    mu: float
    mode: ScheduleMode
    phases: tuple[Phase, ...]
    mu_y: Optional[float] = None

    @property
    def num_phases(self) -> int:
        return len(self.phases)

    @property
    def block_sizes(self) -> list[int]:
        return [p.size for p in self.phases]

    @property
    def mus(self) -> list[float]:
        return [p.mu for p in self.phases]

    @property
    def sigmas(self) -> list[float]:
        return [p.sigma for p in self.phases]

    @property
    def targets(self) -> list[float]:
        return [p.target for p in self.phases]


def make_phase_schedule(
    n: int,
    mu: float,
    lipschitz: float,
    budget: PrivacyBudget,
    mode: ScheduleMode,
    mu_y: Optional[float] = None,
) -> PhaseSchedule:
    """
    Build the phase plan with K = floor(log2 n) and mu_k = mu 2^k.

    Per block of size m and modulus mu_k:
      CONVEX_MIN      sigma = 4L sqrt(2 ln(2.5/delta)) / (mu_k m eps),
                      gamma = delta^2 L^2 / (32 mu_k m^2)
      CONVEX_CONCAVE  sigma = (8L/(m eps)) sqrt(2 ln(5/delta) / (mu_k mu)),
                      gamma = delta L^2 / (16 mu m^2)
      CSC             sigma = (4L/(m eps)) sqrt(2 ln(2.5/delta) / (mu_k min(mu_k, mu_y))),
                      gamma = delta L^2 / (8 m^2 min(mu_k, mu_y))

    Raises:
        ArgumentError: If n < 4, a constant is not positive, or CSC lacks mu_y
    """
    if n < 4:
        raise ArgumentError(f"Phased algorithms need n >= 4, got {n}")
    if mu <= 0 or lipschitz <= 0:
        raise ArgumentError("Phase schedules need mu > 0 and L > 0")
    if mode is ScheduleMode.CSC and (mu_y is None or mu_y <= 0):
        raise ArgumentError("The C-SC schedule needs a positive mu_y")

    eps, delta = budget.epsilon, budget.delta
    k_total = n.bit_length() - 1
    phases = []
    for k, (start, stop) in enumerate(block_bounds(n, k_total), start=1):
        m = stop - start
        mu_k = mu * 2.0**k
        if mode is ScheduleMode.CONVEX_MIN:
            sensitivity = 4.0 * lipschitz / (mu_k * m)
            sigma = gaussian_sigma(sensitivity, budget.scaled(1.0, 0.5))
            target = delta**2 * lipschitz**2 / (32.0 * mu_k * m**2)
        elif mode is ScheduleMode.CONVEX_CONCAVE:
            sensitivity = 4.0 * lipschitz / (m * math.sqrt(mu_k * mu))
            sigma = gaussian_sigma(sensitivity, budget.scaled(0.5, 0.25))
            target = delta * lipschitz**2 / (16.0 * mu * m**2)
        else:
            assert mu_y is not None
            weakest = min(mu_k, mu_y)
            sensitivity = 4.0 * lipschitz / (m * math.sqrt(mu_k * weakest))
            sigma = gaussian_sigma(sensitivity, budget.scaled(1.0, 0.5))
            target = delta * lipschitz**2 / (8.0 * m**2 * weakest)
        phases.append(
            Phase(
                index=k,
                start=start,
                stop=stop,
                mu=mu_k,
                sigma=sigma,
                target=target,
                sensitivity=sensitivity,
            )
        )
    return PhaseSchedule(n=n, mu=mu, mode=mode, phases=tuple(phases), mu_y=mu_y)


def default_mu(
    lipschitz: float,
    radius: float,
    n: int,
    dimension: int,
    budget: PrivacyBudget,
    mode: ScheduleMode,
) -> float:
    """
    Base regularization that balances the statistical and privacy terms.

    Args:
        lipschitz: L
        radius: Norm bound D of the domain
        n: Number of samples
        dimension: d
        budget: Target (epsilon, delta)
        mode: Which algorithm's formula to use

    Returns:
        CONVEX_MIN      (L/D) max(1/sqrt(n), 14 ln(n) sqrt(d ln(2.5/delta)) / (n eps))
        CONVEX_CONCAVE  (L/D) max(2/sqrt(n), 13 ln(n) sqrt(d ln(5/delta)) / (n eps))
        CSC             3 (L/D) max(1/sqrt(n), 4 ln(n) sqrt(d ln(2.5/delta)) / (n eps))
    """
    eps, delta = budget.epsilon, budget.delta
    log_n = math.log(n)
    if mode is ScheduleMode.CONVEX_MIN:
        scale, stat, coef, numerator = 1.0, 1.0, 14.0, 2.5
    elif mode is ScheduleMode.CONVEX_CONCAVE:
        scale, stat, coef, numerator = 1.0, 2.0, 13.0, 5.0
    else:
        scale, stat, coef, numerator = 3.0, 1.0, 4.0, 2.5
    privacy = coef * log_n * math.sqrt(dimension * math.log(numerator / delta)) / (n * eps)
    return scale * (lipschitz / radius) * max(stat / math.sqrt(n), privacy)


def csc_threshold(lipschitz: float, radius: float, n: int) -> float:
    """Smallest mu_y, L/(D sqrt(n)), for which the y-regularizer can be dropped."""
    return lipschitz / (radius * math.sqrt(n))
