"""Shrinkage priors, penalties, and estimators built from subordinators."""

__version__ = "0.1.0"
