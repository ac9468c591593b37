"""Cavity-exciton polaritons coupled to a mechanical mode.

Units: every frequency, coupling and rate is in units of omega_m = 1.
"""
from .params import SystemParams, TruncationSpec
from .polariton import PolaritonFrame, frame_from_params

__version__ = "0.1.0"

__all__ = ["SystemParams", "TruncationSpec", "PolaritonFrame", "frame_from_params", "__version__"]
