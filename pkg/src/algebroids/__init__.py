"""Exact verification of Courant algebroids, vertex algebroids and Pontryagin cocycles."""

__version__ = "0.1.0"
