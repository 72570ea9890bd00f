"""Output-perturbation meta-algorithms around a non-private base solver."""

from .minimax import (
    dp_cc_saddle,
    dp_cc_saddle_dual,
    dp_cc_saddle_primal,
    dp_csc_saddle,
    dp_scsc_saddle,
)
from .minimization import dp_convex_minimize_phased, dp_sc_minimize
from .output import DpRunOutput, PhaseTrace
from .schedule import (
    Phase,
    PhaseSchedule,
    ScheduleMode,
    csc_threshold,
    default_mu,
    make_phase_schedule,
)

__all__ = [
    "DpRunOutput",
    "Phase",
    "PhaseSchedule",
    "PhaseTrace",
    "ScheduleMode",
    "csc_threshold",
    "default_mu",
    "dp_cc_saddle",
    "dp_cc_saddle_dual",
    "dp_cc_saddle_primal",
    "dp_csc_saddle",
    "dp_convex_minimize_phased",
    "dp_sc_minimize",
    "dp_scsc_saddle",
    "make_phase_schedule",
]
