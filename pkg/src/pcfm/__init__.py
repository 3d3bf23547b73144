"""Polynomial closed-form nonlinear interference estimates for wideband WDM links."""
from ._core import BACKEND

__version__ = "0.1.0"
