"""Simulator for electromagnetically induced transparency in a
flux-modulated transmon coupled to a resonator and a waveguide."""
__version__ = "0.1.0"

from .device import DeviceParams, DriveConfig
from .dynamics import HamiltonianSpec, evolve, steady_state, periodic_steady_state, effective_from_lab
from .spectroscopy import Spectrum, sweep_spectrum, fit_two_level, fit_eit
from .pulselab import ProbePulse, ModulationSchedule, propagate
from .config import parse_config, bundled_config_path

__all__ = [
    "DeviceParams", "DriveConfig", "HamiltonianSpec", "evolve", "steady_state",
    "periodic_steady_state", "effective_from_lab", "Spectrum", "sweep_spectrum",
    "fit_two_level", "fit_eit", "ProbePulse", "ModulationSchedule", "propagate",
    "parse_config", "bundled_config_path",
]
