"""Numerical laboratory for factorization of entire local homeomorphisms."""
__version__ = "0.1.0"
