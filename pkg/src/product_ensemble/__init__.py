"""Finite-n correlation kernels of products of random matrices and their bulk and edge limits."""

__version__ = "0.1.0"
