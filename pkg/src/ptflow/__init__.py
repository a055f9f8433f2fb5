"""Simulation and analysis of PT-symmetric dynamics near exceptional points."""

__version__ = "0.1.0"

from .errors import PTFlowError  # noqa: E402

__all__ = ["PTFlowError", "__version__"]
