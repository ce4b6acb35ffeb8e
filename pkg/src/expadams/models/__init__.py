from .beeler_reuter import beeler_reuter, beeler_reuter_system, gate_time_constants, load_parameters
from .dahlquist import EXACT_SPLIT, DahlquistSplit, make_dahlquist, r_from_theta, theta_from_r
from .membrane import MembraneModel, membrane_to_split

__all__ = [
    "EXACT_SPLIT", "DahlquistSplit", "MembraneModel", "beeler_reuter", "beeler_reuter_system", "gate_time_constants",
    "load_parameters", "make_dahlquist", "membrane_to_split", "r_from_theta", "theta_from_r",
]
