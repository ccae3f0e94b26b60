"""Numerical verification of trigonometric and elliptic q-hypergeometric
identities: weight functions, R-matrices, qKZ connections, hypergeometric
pairings, Jackson sums and their closed product forms."""

__version__ = "0.1.0"
