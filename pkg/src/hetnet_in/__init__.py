"""Interference nulling for offloaded users in two-tier multi-antenna networks."""

from .config import (Config, NumericsParams, Scheme, SchemeParams, SystemParams,
                     make_params)

__all__ = ["Config", "NumericsParams", "Scheme", "SchemeParams", "SystemParams",
           "make_params"]
__version__ = "0.1.0"
