"""Exact discrepancies and classification of foliated surface singularities
for adjoint divisors K_F + e K_X."""

__version__ = "0.1.0"
