"""Utility modules for dp-byoa."""

from .artifacts import ArtifactWriter

__all__ = ["ArtifactWriter"]
