"""Decomposition of arbitrary n-qudit unitaries into one- and two-qudit gates.

The unitary is written as a product of eigenphase factors
``W_m = Z_m^dagger X_m Z_m``, one per eigenvector. ``Z_m`` rotates the
eigenvector onto the last basis state by repeatedly reducing the last ``d``
amplitudes with a controlled ``Z_d`` and swapping fresh amplitudes into place
with basis-state transpositions. ``X_m`` is a fully controlled phase gate.
Multi-controlled gates are finally lowered onto two-qudit gates with an
ancilla counter chain.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .circuit import Circuit, Gate, SynthesisReport, _apply_inplace, verify_synthesis
from .core import DEFAULT_TOL, QuditSystem, check_unitary, spectral_decompose
from .errors import CapacityError, DimensionError, UnsupportedConfigurationError
from .gates import LocalSpec, PdSpec, XdSpec, ZdSpec

log = logging.getLogger(__name__)

PRUNE_PHASE = 1e-12
ZERO_AMPLITUDE = 1e-13


@dataclass(frozen=True)
class SynthesisOptions:
    tol: float = 1e-8
    prune_identity: bool = True
    lower_to_two_qudit: bool = True
    seed: int = 0
    completion: str = "gram_schmidt"
    unitarity_tol: float = DEFAULT_TOL
    verify: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")


# -- basis permutations --------------------------------------------------------


def _transposition_stage(cur: Sequence[int], i: int, new: int, sys: QuditSystem) -> list[Gate]:
    """Swap ``|cur>`` with the state whose digit ``i`` is ``new``; fixes all others."""
    d, n = sys.d, sys.n
    convert = [
        Gate(PdSpec(cur[l], d - 1), l) for l in range(n) if l != i and cur[l] != d - 1
    ]
    others = tuple(l for l in range(n) if l != i)
    core = Gate(PdSpec(cur[i], new), i, others)
    return convert + [core] + convert


def synthesize_basis_permutation(
    j_digits: Sequence[int], k_digits: Sequence[int], sys: QuditSystem
) -> Circuit:
    """Circuit exchanging basis states ``|j>`` and ``|k>`` and fixing every other one.

    Digits are changed one qudit at a time, first qudit first. Each stage is a
    transposition between neighbouring states of the chain ``j = a_0, a_1,
    ..., a_m = k``; running the stages forward and then all but the last one
    backward composes them into the single transposition ``(j k)``.
    """
    j, k = list(j_digits), list(k_digits)
    if len(j) != sys.n or len(k) != sys.n:
        raise DimensionError(f"digit sequences must have length n={sys.n}")
    if any(not 0 <= x < sys.d for x in j + k):
        raise DimensionError(f"digits must lie in [0, {sys.d - 1}]")
    stages: list[list[Gate]] = []
    cur = list(j)
    for i in range(sys.n):
        if cur[i] == k[i]:
            continue
        stages.append(_transposition_stage(cur, i, k[i], sys))
        cur[i] = k[i]
    gates = [g for stage in stages + stages[-2::-1] for g in stage]
    return Circuit(sys, tuple(gates))


# -- Z_m, W_m ------------------------------------------------------------------


class _Tracker:
    """State vector kept in sync with the gates emitted so far."""

    def __init__(self, psi: np.ndarray, sys: QuditSystem):
        self.sys = sys
        self.t = np.asarray(psi, dtype=complex).reshape((sys.d,) * sys.n + (1,)).copy()
        self.gates: list[Gate] = []

    @property
    def vector(self) -> np.ndarray:
        return self.t.reshape(-1)

    def emit(self, gates: Sequence[Gate]) -> None:
        for g in gates:
            _apply_inplace(self.t, g, self.sys.d)
            self.gates.append(g)


def synthesize_zm(eigvec: np.ndarray, sys: QuditSystem, completion: str = "gram_schmidt") -> Circuit:
    """Circuit mapping ``eigvec`` onto ``|N-1>`` up to a phase.

    Block loop: reduce the last ``d`` amplitudes into ``|N-1>`` with
    ``Gamma_n[Z_d]`` on the last qudit, then swap the next ``d-1`` unabsorbed
    amplitudes into positions ``N-d .. N-2`` and reduce again, until every
    amplitude has been absorbed.
    """
    psi = np.asarray(eigvec, dtype=complex)
    if psi.shape != (sys.N,):
        raise DimensionError(f"eigvec has shape {psi.shape}, expected ({sys.N},)")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-8:
        raise DimensionError(f"eigvec must be normalized, norm = {nrm!r}")
    d, n, N = sys.d, sys.n, sys.N
    tr = _Tracker(psi / nrm, sys)
    controls = tuple(range(n - 1))
    slots = list(range(N - d, N - 1))

    def reduce_last_block() -> None:
        block = tr.vector[N - d :]
        if np.linalg.norm(block) < 1e-12 or np.max(np.abs(block[:-1])) < ZERO_AMPLITUDE:
            return
        spec = ZdSpec.from_vector(block, completion=completion)
        tr.emit([Gate(spec, n - 1, controls)])

    reduce_last_block()
    remaining = list(range(N - d))
    while remaining:
        block = remaining[-(d - 1) :]
        del remaining[-(d - 1) :]
        for src, dst in zip(block, slots):
            if abs(tr.vector[src]) < ZERO_AMPLITUDE:
                continue
            perm = synthesize_basis_permutation(sys.digits(src), sys.digits(dst), sys)
            tr.emit(perm.gates)
        reduce_last_block()
    return Circuit(sys, tuple(tr.gates))


def synthesize_wm(
    phase: float, eigvec: np.ndarray, sys: QuditSystem, completion: str = "gram_schmidt"
) -> Circuit:
    """``Z_m^dagger Gamma_n[X_d(phase)] Z_m``: multiplies ``eigvec`` by ``e^{i phase}``
    and leaves its orthogonal complement alone."""
    zm = synthesize_zm(eigvec, sys, completion)
    xm = Gate(XdSpec(phase), sys.n - 1, tuple(range(sys.n - 1)))
    return Circuit(sys, zm.gates + (xm,) + zm.inverse().gates)


# -- Gamma_n lowering ------------------------------------------------------------


def ancillas_needed(num_controls: int, d: int) -> int:
    """Ancilla count of the counter chain: ``ceil((m-1)/(d-2))`` for ``m >= 2`` controls."""
    if num_controls <= 1:
        return 0
    if d == 2:
        raise UnsupportedConfigurationError("ancilla-chain lowering needs d >= 3")
    return -(-(num_controls - 1) // (d - 2))


def synthesize_gamman(
    sys: QuditSystem,
    controls: Sequence[int],
    target: int,
    inner: LocalSpec,
    aux_offset: int,
    aux_available: int | None = None,
) -> tuple[Circuit, int]:
    """Lower a multi-controlled gate onto Gamma_2 gates.

    Each ancilla is a counter starting at ``|0>``: controlled transpositions
    ``P(0,1), P(1,2), ...`` raise it one level per feeding qudit found in
    ``|d-1>``. The first ancilla is fed by up to ``d-1`` controls, later ones
    by the previous ancilla plus up to ``d-2`` further controls; a counter's
    last step jumps straight to ``|d-1>`` so an incomplete final segment
    still fires on ``|d-1>``. The payload is controlled by the last ancilla and
    the counters are run backwards afterwards.

    ``sys`` is the computational register; ancillas occupy qudit indices
    ``aux_offset .. aux_offset + r - 1``. Returns the circuit (declared with
    enough ancillas) and ``r``.
    """
    d = sys.d
    controls = tuple(controls)
    m = len(controls)
    r = ancillas_needed(m, d)
    if aux_available is not None and r > aux_available:
        raise CapacityError(f"need {r} ancillas, only {aux_available} declared")
    aux = max(0, aux_offset + r - sys.n)
    if m <= 1:
        return Circuit(sys, (Gate(inner, target, controls),), aux), 0

    ancillas = list(range(aux_offset, aux_offset + r))
    if set(ancillas) & (set(controls) | {target}):
        raise DimensionError("ancilla indices overlap the gate's qudits")
    compute: list[Gate] = []
    pending = list(controls)
    for a, anc in enumerate(ancillas):
        take = d - 1 if a == 0 else d - 2
        feeders = ([ancillas[a - 1]] if a else []) + pending[:take]
        del pending[:take]
        for level, src in enumerate(feeders):
            top = level + 1 if level < len(feeders) - 1 else d - 1
            compute.append(Gate(PdSpec(level, top), anc, (src,)))
    assert not pending
    fire = Gate(inner, target, (ancillas[-1],))
    gates = compute + [fire] + compute[::-1]
    return Circuit(sys, tuple(gates), aux), r


def lower_circuit(circuit: Circuit) -> Circuit:
    """Replace every Gamma_n gate with its Gamma_2 ancilla chain; ancillas are reused."""
    sys = circuit.sys
    offset = sys.n + circuit.aux
    out: list[Gate] = []
    r_max = 0
    for g in circuit.gates:
        if len(g.controls) <= 1:
            out.append(g)
            continue
        sub, r = synthesize_gamman(sys, g.controls, g.target, g.inner, offset)
        r_max = max(r_max, r)
        out.extend(sub.gates)
    return Circuit(sys, tuple(out), circuit.aux + r_max)


# -- whole unitaries -------------------------------------------------------------


def synthesize_unitary(
    U: np.ndarray, sys: QuditSystem, opts: SynthesisOptions | None = None
) -> tuple[Circuit, SynthesisReport]:
    opts = opts or SynthesisOptions()
    U = check_unitary(U, opts.unitarity_tol)
    if U.shape != (sys.N, sys.N):
        raise DimensionError(f"unitary shape {U.shape} does not match d^n = {sys.N}")
    if opts.lower_to_two_qudit and sys.d == 2 and sys.n >= 3:
        raise UnsupportedConfigurationError("lowering to two-qudit gates requires d >= 3 when n >= 3")

    phases, vecs = spectral_decompose(U, opts.unitarity_tol)
    gates: list[Gate] = []
    for m, phase in enumerate(phases):
        if opts.prune_identity and abs(phase) < PRUNE_PHASE:
            continue
        gates.extend(synthesize_wm(phase, vecs[:, m], sys, opts.completion).gates)
    circuit = Circuit(sys, tuple(gates))
    if opts.lower_to_two_qudit:
        circuit = lower_circuit(circuit)
    log.debug("synthesized %d gates on d=%d n=%d (+%d ancillas)", len(circuit), sys.d, sys.n, circuit.aux)

    if opts.verify:
        report = verify_synthesis(U, circuit, opts.tol)
    else:
        report = SynthesisReport(
            global_phase=float("nan"),
            max_deviation=float("nan"),
            gate_counts=circuit.gate_counts(),
            ancilla_count=circuit.aux,
            ancilla_restoration_residual=float("nan"),
            matches=False,
            tol=opts.tol,
        )
    return circuit, report


# -- resource estimates ------------------------------------------------------------


class ResourceEstimate(NamedTuple):
    n: float
    n2: float
    time_ratio: float


def _exact_log(N: int, base: int) -> int | None:
    k, x = 0, 1
    while x < N:
        x *= base
        k += 1
    return k if x == N else None


def estimate_resources(N: int, d: int) -> ResourceEstimate:
    """Qudit count, equivalent qubit count and the ``(log2 d)^2`` gate-count advantage.

    Exact powers are reported as exact integers.
    """
    if d < 2:
        raise DimensionError(f"d must be >= 2, got {d}")
    if N < 1:
        raise DimensionError(f"N must be >= 1, got {N}")
    log2N = math.log2(N)
    log2d = math.log2(d)
    n_exact = _exact_log(N, d) if float(N).is_integer() else None
    n2_exact = _exact_log(N, 2) if float(N).is_integer() else None
    n = n_exact if n_exact is not None else log2N / log2d
    n2 = n2_exact if n2_exact is not None else log2N
    d2 = _exact_log(d, 2)
    ratio = float(d2 * d2) if d2 is not None else log2d**2
    return ResourceEstimate(n, n2, ratio)
