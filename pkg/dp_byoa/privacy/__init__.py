"""Gaussian mechanism, privacy ledger and seeded random streams."""

from .ledger import LedgerEntry, PrivacyLedger, ledger_total
from .mechanisms import (
    GAUSSIAN_LOG_NUMERATOR,
    PrivacyBudget,
    add_gaussian_noise,
    gaussian_sigma,
)
from .streams import RandomStreams

__all__ = [
    "GAUSSIAN_LOG_NUMERATOR",
    "LedgerEntry",
    "PrivacyBudget",
    "PrivacyLedger",
    "RandomStreams",
    "add_gaussian_noise",
    "gaussian_sigma",
    "ledger_total",
]
