"""Iterative plan/reason/verify solving for math word problems."""

__version__ = "0.1.0"
