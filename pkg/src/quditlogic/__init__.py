"""Exact synthesis of qudit unitaries into one- and two-qudit gates, with a trapped-ion back end."""

from .circuit import Circuit, Gate, SynthesisReport, circuit_to_matrix, simulate, verify_synthesis
from .core import QuditSystem, equal_up_to_global_phase, random_unitary, spectral_decompose
from .errors import QuditError
from .gates import PdSpec, XdSpec, ZdSpec, gamma2_matrix, gamman_matrix
from .synthesis import SynthesisOptions, estimate_resources, lower_circuit, synthesize_unitary

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "Gate",
    "PdSpec",
    "QuditError",
    "QuditSystem",
    "SynthesisOptions",
    "SynthesisReport",
    "XdSpec",
    "ZdSpec",
    "circuit_to_matrix",
    "equal_up_to_global_phase",
    "estimate_resources",
    "gamma2_matrix",
    "gamman_matrix",
    "lower_circuit",
    "random_unitary",
    "simulate",
    "spectral_decompose",
    "synthesize_unitary",
    "verify_synthesis",
]
