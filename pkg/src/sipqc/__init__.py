"""Spin dynamics, device physics and readout budget for a donor-spin quantum computer in 28Si."""

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .hamiltonians import ChainParams, SingleSiteParams, TwoSiteParams, h_chain, h_single, h_two_site, transitions
from .pulses import Pulse, Sequence, compile_sequence, cnot_ee_sequence, cpmg_sequence, swap_en_sequence
from .spin import SpinRegister, gate_fidelity, propagator

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONSTANTS",
    "ChainParams",
    "PhysicalConstants",
    "Pulse",
    "Sequence",
    "SingleSiteParams",
    "SpinRegister",
    "TwoSiteParams",
    "cnot_ee_sequence",
    "compile_sequence",
    "cpmg_sequence",
    "gate_fidelity",
    "h_chain",
    "h_single",
    "h_two_site",
    "propagator",
    "swap_en_sequence",
    "transitions",
    "__version__",
]
