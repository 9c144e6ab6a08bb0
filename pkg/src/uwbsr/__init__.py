"""Waveform-level Monte-Carlo simulator for self-reference and transmitted-reference UWB links."""

__version__ = "0.1.0"

from .errors import ConfigurationError
from .engine import BerPoint, Link, LinkConfig, run_ber_point, run_sweep
from .streams import RandomStream

__all__ = ["BerPoint", "ConfigurationError", "Link", "LinkConfig", "RandomStream",
           "__version__", "run_ber_point", "run_sweep"]
