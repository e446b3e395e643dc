"""Relaxation of observables in chaotic and regular quantum systems."""

__version__ = "0.1.0"
