"""Laser controls that realize the single-qudit gates on one ion.

A single carrier pulse ``V`` can rotate any known superposition onto
``|d-1>`` (a ``Z_d`` gate up to a trailing phase). For two and three levels
the Rabi frequencies and duration follow in closed form; for larger ``d``
the conditions ``<d-1|V|p> = c_p^* e^{i phi}`` are solved numerically.
The phase gate ``X_d`` is a detuned 2 pi-pulse between ``|d-1>`` and a shelf
level.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares

from ..core import wrap_phase
from ..errors import DegenerateCoefficientsError, NormalizationError, QuditError
from .hamiltonians import carrier_hamiltonian, evolve, hamiltonian_v
from .model import LevelScheme, PulseSegment

EPS_DEGENERATE = 1e-8
CLOSED_FORM_TARGET = 1e-9
OPTIMIZER_TARGET = 1e-6


def _normalized(coeffs: Sequence[complex]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    norm = float(np.vdot(c, c).real)
    if abs(norm - 1.0) > 1e-10:
        raise NormalizationError(f"coefficients have squared norm {norm!r}, expected 1")
    return c


def target_overlap(seg: PulseSegment, coeffs: Sequence[complex], scheme: LevelScheme | None = None) -> complex:
    """``<d-1| V psi>`` for a carrier segment on the computational ladder."""
    c = np.asarray(coeffs, dtype=complex)
    d = c.size
    scheme = scheme or LevelScheme.default(d)
    if seg.t == 0 or not any(seg.rabi):
        return complex(c[-1])
    V = evolve(hamiltonian_v(scheme, seg.rabi), seg.t)
    return complex((V @ c)[-1])


def infidelity(seg: PulseSegment, coeffs: Sequence[complex], scheme: LevelScheme | None = None) -> float:
    return max(0.0, 1.0 - abs(target_overlap(seg, coeffs, scheme)) ** 2)


def _identity_segment(d: int) -> PulseSegment:
    return PulseSegment("V", (0j,) * (d - 1), 0.0, label="Z identity")


def solve_z2_controls(c0: complex, c1: complex, rabi: float = 1.0) -> PulseSegment:
    """Carrier pulse taking ``c0|0> + c1|1>`` to ``|1>`` (overlap phase ``arg c1``)."""
    c0, c1 = _normalized([c0, c1])
    if abs(c0) < EPS_DEGENERATE:
        return _identity_segment(2)
    if abs(c1) < EPS_DEGENERATE:
        raise DegenerateCoefficientsError("|c1| below degeneracy threshold")
    direction = np.conj(c0) * c1 / (1j * abs(c0 * c1))
    t = math.acos(min(1.0, abs(c1))) / rabi
    return PulseSegment("V", (rabi * direction,), t, label="Z2 closed form")


def solve_z3_controls(c0: complex, c1: complex, c2: complex, rabi: float = 1.0) -> PulseSegment:
    """Carrier pulses on a Lambda system taking ``c0|0> + c1|1> + c2|2>`` to ``|2>``.

    ``cos(Omega t)`` is fixed first from ``|c1|^2/(1-|c2|) - 1``, then the
    positive sine branch, then the two Rabi-frequency directions.
    """
    c0, c1, c2 = _normalized([c0, c1, c2])
    if abs(c1) < EPS_DEGENERATE or abs(c2) < EPS_DEGENERATE or 1 - abs(c2) < EPS_DEGENERATE:
        raise DegenerateCoefficientsError("closed form needs |c1|, |c2| > eps and |c2| < 1")
    C = abs(c1) ** 2 / (1 - abs(c2)) - 1
    C = min(1.0, max(-1.0, C))
    S = math.sqrt(1 - C * C)
    if S < EPS_DEGENERATE or 1 - C < EPS_DEGENERATE:
        raise DegenerateCoefficientsError("pulse area at a branch point")
    r01 = np.conj(c0) * c1 / (1j * abs(c1) ** 2) * S / (1 - C)
    r12 = 1j * c1 * np.conj(c2) / (S * abs(c2))
    t = math.acos(C) / rabi
    return PulseSegment("V", (rabi * r01, rabi * r12), t, label="Z3 closed form")


@dataclass(frozen=True)
class OptimizerConfig:
    """Multi-start least-squares settings; ``|Omega_j| <= rabi_max``, ``0 < t <= t_max``."""

    starts: int = 8
    rabi_max: float = 1.0
    t_max: float = 10.0
    seed: int = 0
    target: float = OPTIMIZER_TARGET
    max_nfev: int = 2000


class ControlSolution(NamedTuple):
    segment: PulseSegment
    infidelity: float
    converged: bool
    method: str


def solve_zd_controls(
    coeffs: Sequence[complex],
    opts: OptimizerConfig | None = None,
    scheme: LevelScheme | None = None,
) -> ControlSolution:
    """Numerically invert ``<d-1|V|p> = c_p^* e^{i phi}`` for the ladder controls.

    Minimizes the population ``V psi`` leaves outside ``|d-1>`` over the real
    and imaginary parts of every Rabi frequency and the duration. All starts
    run; the best result wins, ties going to the earlier start.
    """
    opts = opts or OptimizerConfig()
    c = _normalized(coeffs)
    d = c.size
    scheme = scheme or LevelScheme.default(d)
    if 1.0 - abs(c[-1]) ** 2 < 1e-15:
        return ControlSolution(_identity_segment(d), 0.0, True, "trivial")

    box = opts.rabi_max / math.sqrt(2)
    m = d - 1
    lo = np.r_[np.full(2 * m, -box), 1e-6]
    hi = np.r_[np.full(2 * m, box), opts.t_max]

    def unpack(x: np.ndarray) -> tuple[np.ndarray, float]:
        return x[:m] + 1j * x[m : 2 * m], float(x[-1])

    # generators dH/dx for the real and imaginary part of each Rabi frequency
    basis = []
    for j in range(m):
        e = np.zeros(m, dtype=complex)
        e[j] = 1.0
        basis.append(hamiltonian_v(scheme, e))
    for j in range(m):
        e = np.zeros(m, dtype=complex)
        e[j] = 1j
        basis.append(hamiltonian_v(scheme, e))

    def propagate(x: np.ndarray):
        rabi, t = unpack(x)
        H = hamiltonian_v(scheme, rabi)
        w, Q = np.linalg.eigh(H)
        phases = np.exp(-1j * w * t)
        return H, w, Q, phases, (Q * phases) @ Q.conj().T, t

    def residual(x: np.ndarray) -> np.ndarray:
        out = propagate(x)[4] @ c
        return np.r_[out[:-1].real, out[:-1].imag]

    def jacobian(x: np.ndarray) -> np.ndarray:
        H, w, Q, phases, V, t = propagate(x)
        # Frechet derivative of exp(-iHt) in the eigenbasis of H
        dw = w[:, None] - w[None, :]
        same = np.abs(dw) < 1e-12
        G = np.where(same, -1j * t * phases[:, None], (phases[:, None] - phases[None, :]) / np.where(same, 1.0, dw))
        cq = Q.conj().T @ c
        cols = []
        for B in basis:
            dV_c = Q @ ((G * (Q.conj().T @ B @ Q)) @ cq)
            cols.append(dV_c[:-1])
        cols.append((-1j * H @ V @ c)[:-1])
        J = np.array(cols).T
        return np.vstack([J.real, J.imag])

    rng = np.random.default_rng(opts.seed)
    best: tuple[float, np.ndarray] | None = None
    for _ in range(opts.starts):
        x0 = np.r_[rng.uniform(-box, box, 2 * m), rng.uniform(0.5, opts.t_max)]
        res = least_squares(
            residual, x0, jac=jacobian, bounds=(lo, hi), method="trf",
            xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=opts.max_nfev,
        )
        val = float(np.sum(res.fun**2))
        if best is None or val < best[0]:
            best = (val, res.x)
    assert best is not None
    rabi, t = unpack(best[1])
    seg = PulseSegment("V", tuple(rabi), t, label=f"Z{d} optimized")
    inf = infidelity(seg, c, scheme)
    return ControlSolution(seg, inf, inf < opts.target, "optimizer")


def _zigzag(scheme: LevelScheme) -> bool:
    """Whether the closed forms' orientation (odd levels above their neighbours) holds."""
    return all(scheme.oriented(j, j + 1) == ((j, j + 1) if j % 2 == 0 else (j + 1, j)) for j in range(scheme.d - 1))


def solve_z_controls(
    coeffs: Sequence[complex],
    opts: OptimizerConfig | None = None,
    rabi: float = 1.0,
    scheme: LevelScheme | None = None,
) -> ControlSolution:
    """Closed form where one exists and is well conditioned, otherwise the optimizer."""
    c = _normalized(coeffs)
    d = c.size
    scheme = scheme or LevelScheme.default(d)
    if d > 3 or not _zigzag(scheme):
        return solve_zd_controls(c, opts, scheme)
    try:
        seg = solve_z2_controls(*c, rabi=rabi) if d == 2 else solve_z3_controls(*c, rabi=rabi)
    except DegenerateCoefficientsError:
        return solve_zd_controls(c, opts, scheme)
    inf = infidelity(seg, c, scheme)
    return ControlSolution(seg, inf, inf < CLOSED_FORM_TARGET, "closed_form")


# -- phase gate -------------------------------------------------------------------


class PhasePulse(NamedTuple):
    phase: float
    shelf_population: float
    t: float


def two_pi_phase_pulse(rabi: complex, detuning: float) -> PhasePulse:
    """Phase gained by ``|d-1>`` over one full generalized Rabi cycle to a shelf level.

    The frame keeps ``|d-1>`` at zero energy, so the result is directly the
    phase relative to the undriven levels. Computed from exact two-level
    evolution.
    """
    gen = math.sqrt(abs(rabi) ** 2 + detuning**2 / 4)
    if gen == 0:
        raise QuditError("generalized Rabi frequency is zero")
    t = math.pi / gen
    H = np.array([[0, -np.conj(rabi)], [-rabi, detuning]], dtype=complex)
    U = evolve(H, t)
    return PhasePulse(wrap_phase(cmath.phase(U[0, 0])), float(abs(U[1, 0]) ** 2), t)


def detuning_for_phase(phi: float, rabi: float = 1.0) -> float:
    """Detuning whose 2 pi-pulse advances ``|d-1>`` by ``phi`` (mod 2 pi).

    The acquired phase is ``pi - (pi/2) * delta / Omega'`` which is monotone
    in ``delta``; ``phi = 0`` needs infinite detuning and is rejected.
    """
    phi = math.remainder(phi, 2 * math.pi) % (2 * math.pi)
    if phi == 0.0 or phi == 2 * math.pi:
        raise QuditError("zero phase needs no pulse")
    u = 2 * (math.pi - phi) / math.pi
    return u * abs(rabi) / math.sqrt(1 - u * u / 4)


def solve_x_controls(d: int, phi: float, scheme: LevelScheme | None = None, rabi: float = 1.0) -> PulseSegment:
    """Detuned carrier 2 pi-pulse between ``|d-1>`` and the shelf realizing ``X_d(phi)``."""
    scheme = scheme or LevelScheme.default(d)
    if abs(wrap_phase(phi)) < 1e-15:
        return PulseSegment("V", (0j,), 0.0, transitions=((d - 1, scheme.shelf),), label="X identity")
    delta = detuning_for_phase(phi, rabi)
    gen = math.sqrt(rabi**2 + delta**2 / 4)
    return PulseSegment(
        "V",
        (complex(rabi),),
        math.pi / gen,
        transitions=((d - 1, scheme.shelf),),
        detuning=delta,
        label=f"X{d} 2pi-pulse",
    )


def phase_gate_unitary(seg: PulseSegment, scheme: LevelScheme, levels: int) -> np.ndarray:
    H = carrier_hamiltonian(scheme, seg.pairs(), seg.rabi, levels, seg.detuning)
    return evolve(H, seg.t)
