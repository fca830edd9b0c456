"""Regression-proxy architecture evaluation and search on synthetic signals."""

__version__ = "0.1.0"
