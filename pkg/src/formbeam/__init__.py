"""Beamforming of perturbed multi-satellite virtual arrays."""

__version__ = "0.1.0"
