"""Seedable 3D space-time-frequency non-stationary geometry-based stochastic
channel simulator for THz ultra-massive MIMO systems."""

from .cir import BandPlan
from .config import SimulationConfig, load_config, save_config
from .kernels import BACKEND as KERNEL_BACKEND
from .runner import run
from .simulate import Realization, build_realization, build_scene

__version__ = "0.1.0"

__all__ = [
    "BandPlan",
    "KERNEL_BACKEND",
    "Realization",
    "SimulationConfig",
    "build_realization",
    "build_scene",
    "load_config",
    "run",
    "save_config",
    "__version__",
]
