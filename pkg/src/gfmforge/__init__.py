"""Deterministic builder for graph instruction-tuning corpora."""

__version__ = "0.1.0"
