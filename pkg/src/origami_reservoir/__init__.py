"""Simulated physical reservoir computing on a multistable module chain."""

__version__ = "0.1.0"
