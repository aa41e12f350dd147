"""Exact weight-space algebra, rational functions and descendant polynomials."""
