"""Results of the DP algorithms."""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..privacy.ledger import PrivacyLedger
from ..solvers.base import MinSolveResult, SaddleResult
from .schedule import PhaseSchedule


@dataclass
class PhaseTrace:
    """What happened in one phase (or the single step of a one-shot algorithm)."""

    phase: int
    side: str
    start: int
    stop: int
    anchor: Optional[np.ndarray]
    mu: float
    sigma: float
    target: float
    result: Union[MinSolveResult, SaddleResult]
    pre_noise: np.ndarray
    noised: np.ndarray
    projected: np.ndarray


@dataclass
class DpRunOutput:
    """
    Output of a DP algorithm.

    `x` and `y` are the raw mechanism outputs; the projected copies are what
    evaluation uses. A half algorithm fills only one side.
    """

    algorithm: str
    ledger: PrivacyLedger
    seed: int
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    x_pre_noise: Optional[np.ndarray] = None
    y_pre_noise: Optional[np.ndarray] = None
    x_projected: Optional[np.ndarray] = None
    y_projected: Optional[np.ndarray] = None
    trace: list[PhaseTrace] = field(default_factory=list)
    schedule: Optional[PhaseSchedule] = None
    gradient_evals: int = 0

    @property
    def private(self) -> bool:
        return self.ledger.is_private
