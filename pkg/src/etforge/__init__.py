"""Endurance Time excitation generation and analysis."""

__version__ = "0.1.0"
