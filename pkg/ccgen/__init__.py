"""Synthetic continuous-treatment causal datasets, PPD losses and an in-context toy model."""

__version__ = "0.1.0"
