"""Finite-depth selection games on countable spaces and on C_p(X, G)."""

__version__ = "0.1.0"
