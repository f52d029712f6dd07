"""Trapped-ion realization of the gate set: Hamiltonians, control solvers, two-ion protocol."""

from .hamiltonians import (
    binary_v_closed_form,
    evolve,
    hamiltonian_u,
    hamiltonian_v,
    segment_unitary,
    ternary_v_closed_form,
)
from .model import LevelScheme, PulseProgram, PulseSegment, TrapConfig, dumps_program, loads_program
from .protocol import ProtocolResult, gamma2_protocol, program_operator
from .solvers import (
    ControlSolution,
    OptimizerConfig,
    detuning_for_phase,
    solve_x_controls,
    solve_z2_controls,
    solve_z3_controls,
    solve_z_controls,
    solve_zd_controls,
    two_pi_phase_pulse,
)

__all__ = [
    "ControlSolution",
    "LevelScheme",
    "OptimizerConfig",
    "ProtocolResult",
    "PulseProgram",
    "PulseSegment",
    "TrapConfig",
    "binary_v_closed_form",
    "detuning_for_phase",
    "dumps_program",
    "evolve",
    "gamma2_protocol",
    "hamiltonian_u",
    "hamiltonian_v",
    "loads_program",
    "program_operator",
    "segment_unitary",
    "solve_x_controls",
    "solve_z2_controls",
    "solve_z3_controls",
    "solve_z_controls",
    "solve_zd_controls",
    "ternary_v_closed_form",
    "two_pi_phase_pulse",
]
