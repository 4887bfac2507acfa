"""Numerical bifurcation analysis of saddle-node/transcritical interactions
in a Lotka-Volterra model with constant-rate harvesting or migration."""

from .backend import BACKEND_NAME

__version__ = "0.1.0"

__all__ = ["BACKEND_NAME", "__version__"]
