"""Classical simulation of quantum circuits whose non-Clifford gates sit in a
few diagonal layers.

Set ``MAGICDEPTH_DISABLE_NUMBA=1`` before import to force the numpy kernels.
"""
from ._accel import HAVE_NUMBA, backend
from .circuit import IQP3, Circuit, Gate, layered_form, load_circuit, parse_circuit, serialize_circuit
from .core import DyadicPhase, PauliString, PhasePolynomial

__version__ = "0.1.0"

__all__ = [
    "HAVE_NUMBA", "backend", "Circuit", "Gate", "IQP3", "layered_form", "load_circuit",
    "parse_circuit", "serialize_circuit", "DyadicPhase", "PauliString", "PhasePolynomial",
]
