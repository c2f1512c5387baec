"""Walkshed demographics and park visitation modeling."""

__version__ = "0.1.0"
