"""Two-ion controlled gate through the centre-of-mass phonon bus.

Stages, with the trap starting in its ground state:

1. sideband pi-pulse on the control ion moves every level except ``|d-1>``
   to its auxiliary partner and adds one phonon;
2. carrier pi-pulse on the control ion brings those levels back, leaving
   the phonon as a flag for "control is not ``d-1``";
3. sideband pi-pulse on the target ion absorbs the phonon, parking the
   target in its auxiliary manifold whenever the flag is set;
4. the single-ion gate ``Y`` on the target's computational levels, which
   the parked amplitudes do not see;
5. stages 3, 2, 1 undone by their inverse pulses.

Every transfer pulse uses laser phases chosen so that the population moves
with amplitude exactly +1, so no bookkeeping phases appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import PhaseMatch, equal_up_to_global_phase, unitarity_deviation
from ..errors import ConvergenceError, DimensionError, PhononLeakageError, QuditError, UnsupportedConfigurationError
from ..gates import gamma2_matrix
from .hamiltonians import segment_unitary
from .model import LevelScheme, PulseProgram, PulseSegment, TrapConfig
from .solvers import OptimizerConfig, solve_x_controls, solve_z_controls

LEAKAGE_TOL = 1e-10
N_IONS = 2


@dataclass(frozen=True)
class ProtocolResult:
    program: PulseProgram
    operator: np.ndarray
    restricted: np.ndarray
    y_matrix: np.ndarray
    leakage: float
    cutoff_population: float
    y_infidelity: float

    @property
    def levels(self) -> int:
        return int(self.program.metadata.get("levels", self.program.scheme.num_levels))

    def compare(self, tol: float = 1e-8) -> PhaseMatch:
        """Restricted operator against ``Gamma_2[Y]`` built from the realized ``Y``."""
        return equal_up_to_global_phase(self.restricted, gamma2_matrix(self.program.d, self.y_matrix), tol)


def _num_levels(scheme: LevelScheme, y_kind: str) -> int:
    return scheme.num_levels if y_kind == "X" else 2 * scheme.d


def program_stages(program: PulseProgram, levels: int | None = None) -> list[np.ndarray]:
    return [segment_unitary(s, program.scheme, program.trap, program.n_ions, levels) for s in program.segments]


def program_operator(program: PulseProgram, levels: int | None = None) -> np.ndarray:
    """Time-ordered product of every segment's evolution on ions (x) trap."""
    L = program.scheme.num_levels if levels is None else levels
    U = np.eye(L**program.n_ions * (program.trap.n_max + 1), dtype=complex)
    for S in program_stages(program, levels):
        U = S @ U
    return U


def computational_indices(d: int, levels: int, n_max: int) -> np.ndarray:
    """Joint indices of ``|c>_C |t>_T |0>`` for computational ``c``, ``t``."""
    P = n_max + 1
    return np.array([(c * levels + t) * P for c in range(d) for t in range(d)])


def _sideband_sign(scheme: LevelScheme, on_control: bool) -> str:
    # aux above: U+ takes |j,n> -> |aux,n+1>, U- takes |t,n+1> -> |aux,n>
    up = scheme.aux_above()
    return ("+" if up else "-") if on_control else ("-" if up else "+")


def transfer_segments(
    scheme: LevelScheme,
    trap: TrapConfig,
    rabi: float = 1.0,
    control_sign: str | None = None,
) -> list[PulseSegment]:
    """Stages 1-3 of the protocol."""
    d = scheme.d
    phase = 1j if scheme.aux_above() else -1j
    c_sign = control_sign or _sideband_sign(scheme, True)
    t_sign = {"+": "-", "-": "+"}[c_sign]

    def sideband(ion: int, levels: Sequence[int], sign: str, label: str) -> PulseSegment:
        gs = [trap.eta_for(j) / math.sqrt(trap.q) for j in levels]
        t = math.pi / (2 * rabi * min(gs))
        amps = tuple(phase * math.pi / (2 * g * t) for g in gs)
        pairs = tuple((j, scheme.aux(j)) for j in levels)
        return PulseSegment("U" + sign, amps, t, ion=ion, transitions=pairs, label=label)

    lower = list(range(d - 1))
    carrier = PulseSegment(
        "V",
        (phase * rabi,) * len(lower),
        math.pi / (2 * rabi),
        ion=0,
        transitions=tuple((j, scheme.aux(j)) for j in lower),
        label="control relabel",
    )
    return [
        sideband(0, lower, c_sign, "control to bus"),
        carrier,
        sideband(1, list(range(d)), t_sign, "bus to target"),
    ]


def _y_segment(
    scheme: LevelScheme,
    y_kind: str,
    y_params,
    rabi: float,
    opts: OptimizerConfig | None,
) -> tuple[PulseSegment, float]:
    d = scheme.d
    if y_kind == "Z":
        sol = solve_z_controls(y_params, opts, rabi, scheme)
        if not sol.converged:
            raise ConvergenceError(f"Z{d} control solve did not converge (infidelity {sol.infidelity:.3e})")
        seg = sol.segment
        return PulseSegment("V", seg.rabi, seg.t, ion=1, transitions=seg.transitions, label=seg.label), sol.infidelity
    if y_kind == "X":
        seg = solve_x_controls(d, float(y_params), scheme, rabi)
        return PulseSegment(
            "V", seg.rabi, seg.t, ion=1, transitions=seg.transitions, detuning=seg.detuning, label=seg.label
        ), 0.0
    raise QuditError(f"Y kind must be 'Z' or 'X', got {y_kind!r}")


def realized_single_ion(seg: PulseSegment, scheme: LevelScheme, levels: int) -> np.ndarray:
    """The segment's action on one ion, restricted to the computational levels."""
    solo = TrapConfig(n_max=1)
    single = PulseSegment(
        seg.interaction, seg.rabi, seg.t, seg.sw_phase, 0, seg.transitions, seg.detuning, seg.label
    )
    U = segment_unitary(single, scheme, solo, 1, levels)
    U = U[::2, ::2]  # phonon |0> slice; a carrier pulse leaves the trap alone
    return U[: scheme.d, : scheme.d]


def gamma2_protocol(
    scheme: LevelScheme,
    trap: TrapConfig,
    y_kind: str,
    y_params,
    *,
    rabi: float = 1.0,
    control_sign: str | None = None,
    opts: OptimizerConfig | None = None,
    leakage_tol: float = LEAKAGE_TOL,
) -> ProtocolResult:
    """Build and simulate the five-stage program realizing ``Gamma_2[Y]``.

    ``y_kind`` is ``"Z"`` (``y_params`` the coefficient vector to rotate
    onto ``|d-1>``) or ``"X"`` (``y_params`` the phase). Raises
    ``PhononLeakageError`` when any stage puts more than ``leakage_tol`` of
    population on the phonon cutoff, or when population fails to return to
    the computational subspace.
    """
    d = scheme.d
    if trap.n_max < 2:
        raise UnsupportedConfigurationError("the protocol needs a phonon cutoff n_max >= 2")
    if trap.q < N_IONS:
        raise DimensionError("the trap must hold at least two ions")
    if y_kind == "X" and scheme.shelf_energy is None:
        raise UnsupportedConfigurationError("the phase gate needs a shelf level")
    L = _num_levels(scheme, y_kind)

    forward = transfer_segments(scheme, trap, rabi, control_sign)
    y_seg, y_inf = _y_segment(scheme, y_kind, y_params, rabi, opts)
    segments = forward + [y_seg] + [s.inverse() for s in reversed(forward)]
    program = PulseProgram(
        d,
        scheme,
        trap,
        tuple(segments),
        n_ions=N_IONS,
        metadata={"protocol": "gamma2", "y_kind": y_kind, "levels": L},
    )

    P = trap.n_max + 1
    idx = computational_indices(d, L, trap.n_max)
    cols = np.eye(L * L * P, dtype=complex)[:, idx]
    cutoff = 0.0
    operator = np.eye(L * L * P, dtype=complex)
    for S in program_stages(program, L):
        operator = S @ operator
        cols = S @ cols
        at_cutoff = np.abs(cols.reshape(L * L, P, -1)[:, -1, :]) ** 2
        cutoff = max(cutoff, float(at_cutoff.sum(axis=0).max()))
    if cutoff > leakage_tol:
        raise PhononLeakageError(f"population {cutoff:.3e} reached the phonon cutoff n_max={trap.n_max}")

    restricted = operator[np.ix_(idx, idx)]
    leakage = float(np.max(1.0 - np.sum(np.abs(restricted) ** 2, axis=0)))
    if leakage > leakage_tol:
        raise PhononLeakageError(f"population {leakage:.3e} left the computational subspace")
    y_matrix = realized_single_ion(y_seg, scheme, L)
    return ProtocolResult(program, operator, restricted, y_matrix, max(leakage, 0.0), cutoff, y_inf)


def stage12_state(program: PulseProgram, psi_c: np.ndarray, phi_t: np.ndarray, levels: int | None = None) -> np.ndarray:
    """Joint state after the first two stages for a product input."""
    L = program.scheme.num_levels if levels is None else levels
    d = program.d
    P = program.trap.n_max + 1
    c = np.zeros(L, dtype=complex)
    c[:d] = psi_c
    t = np.zeros(L, dtype=complex)
    t[:d] = phi_t
    vac = np.zeros(P, dtype=complex)
    vac[0] = 1
    state = np.kron(np.kron(c, t), vac)
    for S in program_stages(PulseProgram(d, program.scheme, program.trap, program.segments[:2], program.n_ions), L):
        state = S @ state
    return state


def stage12_expected(d: int, levels: int, n_max: int, psi_c: np.ndarray, phi_t: np.ndarray) -> np.ndarray:
    """``c_{d-1}|d-1>|phi>|0> + sum_{k<d-1} c_k |k>|phi>|1>``."""
    P = n_max + 1
    out = np.zeros(levels * levels * P, dtype=complex)
    for k in range(d):
        n = 0 if k == d - 1 else 1
        for j in range(d):
            out[(k * levels + j) * P + n] = psi_c[k] * phi_t[j]
    return out


def protocol_unitarity(result: ProtocolResult) -> float:
    return unitarity_deviation(result.operator)
