"""Gaussian field sampling and Monte Carlo correlator estimators."""
