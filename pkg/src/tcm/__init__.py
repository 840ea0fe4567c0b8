"""Pseudo-spectral lab for the 2D tropical climate model without thermal diffusion."""

__version__ = "0.1.0"
