"""Generalized spherical ensemble on even-dimensional spheres: sampling, kernels and Riesz energy."""

__version__ = "0.1.0"
