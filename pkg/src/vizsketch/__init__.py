"""Synthesis of visualizations and table transformations from a partial sketch."""

__version__ = "0.1.0"
