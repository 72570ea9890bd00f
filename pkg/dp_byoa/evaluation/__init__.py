"""Utility, stability and gap measurements for DP runs."""

from .risk import (
    RiskEstimate,
    empirical_minimizer,
    estimate_excess_risk,
    excess_empirical_risk,
    excess_population_risk,
    gap_sandwich_probe,
    minimax_value,
    primal_gap_estimate,
    weak_gap_estimate,
)
from .stability import (
    InequalityReport,
    StabilityReport,
    neighbor_shift_min,
    neighbor_shift_minimax,
    prox_nonexpansiveness_probe,
    stability_probe_min,
    stability_probe_minimax,
)
from .sweep import (
    CSV_COLUMNS,
    RunOutcome,
    UtilityRecord,
    aggregate_records,
    loglog_slope,
    records_frame,
    run_algorithm,
    utility_sweep,
)

__all__ = [
    "CSV_COLUMNS",
    "InequalityReport",
    "RiskEstimate",
    "RunOutcome",
    "StabilityReport",
    "UtilityRecord",
    "aggregate_records",
    "empirical_minimizer",
    "estimate_excess_risk",
    "excess_empirical_risk",
    "excess_population_risk",
    "gap_sandwich_probe",
    "loglog_slope",
    "minimax_value",
    "neighbor_shift_min",
    "neighbor_shift_minimax",
    "primal_gap_estimate",
    "prox_nonexpansiveness_probe",
    "records_frame",
    "run_algorithm",
    "stability_probe_min",
    "stability_probe_minimax",
    "utility_sweep",
    "weak_gap_estimate",
]
