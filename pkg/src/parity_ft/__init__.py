"""Fault-tolerance thresholds for parity-encoded linear optical quantum computing."""

from .rates import PhysicalNoise, all_rates, optimal_code_size, walk_success
from .resources import circuit_cost, parity_state_cost, rxx_cost, telecorrector_cost, z90_cost

__all__ = [
    "PhysicalNoise",
    "all_rates",
    "circuit_cost",
    "optimal_code_size",
    "parity_state_cost",
    "rxx_cost",
    "telecorrector_cost",
    "walk_success",
    "z90_cost",
]

__version__ = "0.1.0"
