"""
Toda Ward Lab

Verification laboratory for the sl3 boundary Toda conformal field theory on the
upper half-plane: exact free-field checks of the Virasoro and spin-3 Ward
identities, and Monte Carlo estimates of regularized correlators with
statistical checks of the KPZ identity, conformal covariance and fusion rates.
"""

__version__ = "1.0.0"
