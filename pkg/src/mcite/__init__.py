"""Exact simulation of multi-copy unitary imaginary-time evolution protocols."""

__version__ = "0.1.0"
