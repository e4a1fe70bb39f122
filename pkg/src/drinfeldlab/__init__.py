"""Exact and numeric tools for Drinfeld modular forms and their t-deformations."""

from .config import Config, config_for_q, REPORT_FORMAT

__version__ = "0.1.0"

__all__ = ["Config", "config_for_q", "REPORT_FORMAT", "__version__"]
