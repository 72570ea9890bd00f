"""Routing of experiment configs to their runners."""

from .experiment_router import ExperimentResult, ExperimentRouter, ProbeRecord, Subcommand

__all__ = ["ExperimentResult", "ExperimentRouter", "ProbeRecord", "Subcommand"]
