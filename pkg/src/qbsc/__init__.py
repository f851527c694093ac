"""Quantum bit string commitment laboratory."""

__version__ = "0.1.0"
