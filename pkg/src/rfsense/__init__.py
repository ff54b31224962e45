"""Linearized optoelectromechanical model for weak-capacitance rf sensing."""
from .closed_form import XI_BAR, noise_params, r_im, r_max, snr_closed, w_opt, xi_bar
from .measurement import SensingReport, snr_matrix
from .model import (
    ConfigurationError,
    DomainError,
    PreconditionError,
    SystemParams,
    ThermalOccupancies,
    Topology,
    thermal_occupancy,
)
from .optimize import Axis, SweepSpec, maximize_over_gamma2, run_sweep
from .scattering import ScatteringPair, UnstableModelError

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "ConfigurationError",
    "DomainError",
    "PreconditionError",
    "ScatteringPair",
    "SensingReport",
    "SweepSpec",
    "SystemParams",
    "ThermalOccupancies",
    "Topology",
    "UnstableModelError",
    "XI_BAR",
    "maximize_over_gamma2",
    "noise_params",
    "r_im",
    "r_max",
    "run_sweep",
    "snr_closed",
    "snr_matrix",
    "thermal_occupancy",
    "w_opt",
    "xi_bar",
]
