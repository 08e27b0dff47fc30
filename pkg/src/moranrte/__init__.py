"""Stationary distributions, entropy rates and random trajectory entropies of Moran processes."""

__version__ = "0.1.0"
