"""Distilling Toffoli states from |H> states: circuits, simulators, fault enumeration and cost model."""

from .circuit import Circuit, parse, serialize
from .pauli import CliffordGate, PauliString
from .poly import Polynomial

__all__ = ["Circuit", "CliffordGate", "PauliString", "Polynomial", "parse", "serialize"]
__version__ = "0.1.0"
