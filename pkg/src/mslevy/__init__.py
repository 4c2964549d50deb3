"""Densities of two-scale stable Levy processes and multifractal conservation laws."""

__version__ = "0.1.0"
