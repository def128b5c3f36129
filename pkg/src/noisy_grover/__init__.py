"""Noisy Grover search on a qubit chain: simulation, certified bounds, iterate planning."""

from .errors import ContractViolation, ParameterRange, UnsupportedSize

__all__ = ["ContractViolation", "ParameterRange", "UnsupportedSize"]
