"""Stability and Hopf-bifurcation analysis of a delayed intraguild-predation model."""

__version__ = '0.1.0'
