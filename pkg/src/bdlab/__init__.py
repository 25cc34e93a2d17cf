"""Billiards dynamics lab: datasets, interaction-network predictor, benchmarks."""

__version__ = "0.1.0"
