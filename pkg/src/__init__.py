"""nevdyn - TFV/NEV adoption dynamics laboratory."""

from .main import NevDynLab, cli

__version__ = "0.1.0"
__all__ = ["NevDynLab", "cli"]
