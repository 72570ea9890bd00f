"""dp-byoa - differentially private optimization around any non-private base solver."""

__version__ = "1.0.0"
