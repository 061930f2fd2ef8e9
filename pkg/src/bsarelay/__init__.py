"""Block signal alignment precoding for MIMO two-way relay cellular networks."""

from .estimators import SCHEMES, BSAPrecoder, P2PSAPrecoder, TimeSharingScheme, make_scheme
from .harness import SweepResult, SweepSpec, emit_results, load_results, run_sweep
from .system import ChannelSet, NoiseLevels, RngSpec, SystemConfig, draw_channels, snr_to_sigma

__version__ = "0.1.0"

__all__ = [
    "SCHEMES",
    "BSAPrecoder",
    "P2PSAPrecoder",
    "TimeSharingScheme",
    "make_scheme",
    "SweepResult",
    "SweepSpec",
    "emit_results",
    "load_results",
    "run_sweep",
    "ChannelSet",
    "NoiseLevels",
    "RngSpec",
    "SystemConfig",
    "draw_channels",
    "snr_to_sigma",
]
