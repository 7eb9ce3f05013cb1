"""Semi-automated harvesting and human review of protest news events."""

__version__ = "0.1.0"
