"""Sized-type core language: checker, evaluator and lattice oracle."""

__version__ = "0.1.0"
