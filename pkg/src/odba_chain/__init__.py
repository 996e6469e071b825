"""Integrable spin-1/2 chain with NNN and chiral three-spin couplings under antiperiodic twist."""

from .chain import ModelParams

__all__ = ["ModelParams"]
__version__ = "0.1.0"
