"""Shortcuts to adiabaticity for the driven two-level (Landau-Zener) qubit.

Builds adiabatic, traditional and generalized transitionless-driving
Hamiltonians, propagates them with and without dephasing, and evaluates
fidelity and energy-cost figures of merit.
"""
from .dynamics import EvolutionResult, NoiseConfig, propagate_lindblad, propagate_stochastic, propagate_unitary
from .metrics import CostReport, cost_report, tau_adiabatic, tau_boundary_intensity, tau_boundary_sigma
from .protocols import LINEAR, LZParams, PhaseChoice, Protocol, ProtocolSpec, Schedule

__version__ = "0.1.0"

__all__ = [
    "CostReport",
    "EvolutionResult",
    "LINEAR",
    "LZParams",
    "NoiseConfig",
    "PhaseChoice",
    "Protocol",
    "ProtocolSpec",
    "Schedule",
    "cost_report",
    "propagate_lindblad",
    "propagate_stochastic",
    "propagate_unitary",
    "tau_adiabatic",
    "tau_boundary_intensity",
    "tau_boundary_sigma",
]
