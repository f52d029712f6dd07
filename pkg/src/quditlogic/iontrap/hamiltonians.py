"""Interaction-picture Hamiltonians of driven multi-level ions and their evolution.

Under the rotating-wave approximation a resonant drive with the ion at a
standing-wave antinode gives the carrier interaction ``V``:

    H_V = -sum_j [Omega_j s_j^dag + Omega_j^* s_j]

and a drive detuned by the trap frequency with the ion at a node gives the
sideband interactions:

    H_U+ = sum_j (eta_j / sqrt q) [Omega_j s_j^dag a^dag + Omega_j^* s_j a]
    H_U- = sum_j (eta_j / sqrt q) [Omega_j s_j^dag a     + Omega_j^* s_j a^dag]

where ``s_j^dag`` raises the ion from the lower to the upper level of
transition ``j``. Joint operators are ordered ion_0 (x) ion_1 (x) ... (x) trap.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..errors import DimensionError, NotHermitianError, QuditError
from .model import LevelScheme, PulseSegment, TrapConfig, ladder_rabi

HERMITIAN_TOL = 1e-12


def annihilation(n_max: int) -> np.ndarray:
    """Truncated phonon lowering operator on ``|0>..|n_max>``."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


def raising(scheme: LevelScheme, a: int, b: int, num_levels: int) -> np.ndarray:
    lo, hi = scheme.oriented(a, b)
    if max(lo, hi) >= num_levels:
        raise DimensionError(f"transition ({a}, {b}) outside {num_levels} levels")
    s = np.zeros((num_levels, num_levels), dtype=complex)
    s[hi, lo] = 1.0
    return s


def carrier_hamiltonian(
    scheme: LevelScheme,
    pairs: Sequence[tuple[int, int]],
    rabi: Sequence[complex],
    num_levels: int,
    detuning: float = 0.0,
) -> np.ndarray:
    H = np.zeros((num_levels, num_levels), dtype=complex)
    for (a, b), om in zip(pairs, rabi, strict=True):
        sd = raising(scheme, a, b, num_levels)
        H -= om * sd + np.conj(om) * sd.conj().T
        if detuning:
            H[b, b] += detuning
    return H


def sideband_terms(
    scheme: LevelScheme,
    trap: TrapConfig,
    pairs: Sequence[tuple[int, int]],
    rabi: Sequence[complex],
    num_levels: int,
    sign: str,
    eta_index: Sequence[int] | None = None,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """``(internal, phonon)`` operator pairs whose Kronecker products sum to ``H_U+-``."""
    if sign not in ("+", "-"):
        raise QuditError(f"sideband sign must be '+' or '-', got {sign!r}")
    a = annihilation(trap.n_max)
    ad = a.conj().T
    up, down = (ad, a) if sign == "+" else (a, ad)
    terms = []
    for k, ((p, q), om) in enumerate(zip(pairs, rabi, strict=True)):
        eta = trap.eta_for(k if eta_index is None else eta_index[k])
        g = eta / math.sqrt(trap.q)
        sd = raising(scheme, p, q, num_levels)
        terms.append((g * om * sd, up))
        terms.append((g * np.conj(om) * sd.conj().T, down))
    return terms


def hamiltonian_v(scheme: LevelScheme, rabi: Sequence[complex]) -> np.ndarray:
    """Carrier Hamiltonian on the ``d`` computational levels (``d x d``)."""
    d = scheme.d
    rabi = ladder_rabi(rabi, d)
    return carrier_hamiltonian(scheme, [(j, j + 1) for j in range(d - 1)], rabi, d)


def hamiltonian_u(scheme: LevelScheme, trap: TrapConfig, rabi: Sequence[complex], sign: str) -> np.ndarray:
    """Sideband Hamiltonian on computational levels (x) phonons ``0..n_max``."""
    d = scheme.d
    rabi = ladder_rabi(rabi, d)
    pairs = [(j, j + 1) for j in range(d - 1)]
    terms = sideband_terms(scheme, trap, pairs, rabi, d, sign)
    dim = d * (trap.n_max + 1)
    H = np.zeros((dim, dim), dtype=complex)
    for A, B in terms:
        H += np.kron(A, B)
    return H


def ladder_excitation(scheme: LevelScheme) -> np.ndarray:
    """Diagonal excitation number raised by one by every ladder ``s_j^dag``."""
    e = [0]
    for j in range(scheme.d - 1):
        e.append(e[-1] + (1 if scheme.energies[j + 1] > scheme.energies[j] else -1))
    return np.diag(np.array(e, dtype=float)).astype(complex)


def evolve(H: np.ndarray, t: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """``exp(-i H t)`` for a time-independent Hermitian ``H`` (hbar = 1)."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"expected a square matrix, got {H.shape}")
    dev = float(np.max(np.abs(H - H.conj().T))) if H.size else 0.0
    if dev > tol * max(1.0, float(np.max(np.abs(H))) if H.size else 1.0):
        raise NotHermitianError(f"Hamiltonian is not Hermitian: max|H - H^dag| = {dev:.3e}")
    H = 0.5 * (H + H.conj().T)
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


# -- closed forms for two and three levels ------------------------------------


def binary_v_closed_form(omega01: complex, t: float) -> np.ndarray:
    """Two-level Rabi oscillation under a resonant carrier."""
    W = abs(omega01)
    if W == 0:
        return np.eye(2, dtype=complex)
    C, S = math.cos(W * t), math.sin(W * t)
    return np.array(
        [[W * C, 1j * np.conj(omega01) * S], [1j * omega01 * S, W * C]],
        dtype=complex,
    ) / W


def ternary_v_closed_form(omega01: complex, omega12: complex, t: float) -> np.ndarray:
    """Three-level Lambda system (level 1 on top) under resonant carriers."""
    a, b = complex(omega01), complex(omega12)
    W2 = abs(a) ** 2 + abs(b) ** 2
    if W2 == 0:
        return np.eye(3, dtype=complex)
    W = math.sqrt(W2)
    C, S = math.cos(W * t), math.sin(W * t)
    M = np.array(
        [
            [abs(b) ** 2 + abs(a) ** 2 * C, 1j * np.conj(a) * W * S, np.conj(a) * b * (C - 1)],
            [1j * a * W * S, W2 * C, 1j * b * W * S],
            [a * np.conj(b) * (C - 1), 1j * np.conj(b) * W * S, abs(a) ** 2 + abs(b) ** 2 * C],
        ],
        dtype=complex,
    )
    return M / W2


# -- joint ion-trap register ----------------------------------------------------------


def _embed(op: np.ndarray, ion: int, n_ions: int, levels: int) -> np.ndarray:
    eye = np.eye(levels, dtype=complex)
    out = np.ones((1, 1), dtype=complex)
    for i in range(n_ions):
        out = np.kron(out, op if i == ion else eye)
    return out


def segment_hamiltonian(
    seg: PulseSegment,
    scheme: LevelScheme,
    trap: TrapConfig,
    n_ions: int,
    levels: int | None = None,
) -> np.ndarray:
    """Hamiltonian of one pulse on the joint register ions (x) trap."""
    L = scheme.num_levels if levels is None else levels
    P = trap.n_max + 1
    pairs = seg.pairs()
    if seg.interaction == "V":
        Hint = carrier_hamiltonian(scheme, pairs, seg.rabi, L, seg.detuning)
        return np.kron(_embed(Hint, seg.ion, n_ions, L), np.eye(P, dtype=complex))
    sign = seg.interaction[1]
    eta_index = [min(a, b) % scheme.d for a, b in pairs]
    H = np.zeros((L**n_ions * P,) * 2, dtype=complex)
    for A, B in sideband_terms(scheme, trap, pairs, seg.rabi, L, sign, eta_index):
        H += np.kron(_embed(A, seg.ion, n_ions, L), B)
    if seg.detuning:
        raise QuditError("detuned sideband pulses are not modelled")
    return H


def segment_unitary(seg: PulseSegment, scheme: LevelScheme, trap: TrapConfig, n_ions: int, levels: int | None = None) -> np.ndarray:
    if seg.t == 0:
        L = scheme.num_levels if levels is None else levels
        return np.eye(L**n_ions * (trap.n_max + 1), dtype=complex)
    return evolve(segment_hamiltonian(seg, scheme, trap, n_ions, levels), seg.t)
