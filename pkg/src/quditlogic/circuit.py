"""Circuit intermediate representation, execution and verification.

A :class:`Circuit` acts on ``n`` computational qudits followed by ``aux``
ancilla qudits (highest indices). Gates are applied in sequence order, the
first gate acting first on a state.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import (
    DEFAULT_TOL,
    QuditSystem,
    complex_to_pair,
    equal_up_to_global_phase,
    pair_to_complex,
)
from .errors import DimensionError, FormatError, QuditError
from .gates import LocalSpec, PdSpec, XdSpec, ZdSpec, _cached_matrix

MAX_MATRIX_DIM = 4096

_TAGS = {ZdSpec: "Z", XdSpec: "X", PdSpec: "P"}


@dataclass(frozen=True)
class Gate:
    """A local gate (no controls), a Gamma_2 gate (one control) or a Gamma_n gate."""

    inner: LocalSpec
    target: int
    controls: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        object.__setattr__(self, "target", int(self.target))
        if self.target in self.controls or len(set(self.controls)) != len(self.controls):
            raise DimensionError(f"controls {self.controls} and target {self.target} must be distinct")

    @property
    def kind(self) -> str:
        tag = _TAGS[type(self.inner)]
        if not self.controls:
            return tag
        return ("C2" if len(self.controls) == 1 else "CN") + tag

    @property
    def qudits(self) -> tuple[int, ...]:
        return self.controls + (self.target,)

    def inverse(self) -> "Gate":
        return Gate(self.inner.inverse(), self.target, self.controls)

    def local_matrix(self, d: int) -> np.ndarray:
        return self.inner.matrix(d)


@dataclass(frozen=True)
class Circuit:
    sys: QuditSystem
    gates: tuple[Gate, ...] = ()
    aux: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        width = self.sys.n + self.aux
        for g in self.gates:
            if any(not 0 <= q < width for q in g.qudits):
                raise DimensionError(f"gate {g.kind} on {g.qudits} outside register of {width} qudits")
            if isinstance(g.inner, ZdSpec) and g.inner.d != self.sys.d:
                raise DimensionError(f"Z gate has {g.inner.d} levels, register has d={self.sys.d}")
            if isinstance(g.inner, PdSpec) and g.inner.q >= self.sys.d:
                raise DimensionError(f"P levels {g.inner.p, g.inner.q} exceed d={self.sys.d}")

    @property
    def width(self) -> int:
        return self.sys.n + self.aux

    @property
    def full_system(self) -> QuditSystem:
        return self.sys.extended(self.aux)

    @property
    def dim(self) -> int:
        return self.sys.d**self.width

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.sys != self.sys:
            raise DimensionError("cannot concatenate circuits on different registers")
        return Circuit(self.sys, self.gates + other.gates, max(self.aux, other.aux))

    def inverse(self) -> "Circuit":
        return Circuit(self.sys, tuple(g.inverse() for g in reversed(self.gates)), self.aux)

    def with_aux(self, aux: int) -> "Circuit":
        return Circuit(self.sys, self.gates, aux)

    def gate_counts(self) -> dict[str, int]:
        return dict(sorted(Counter(g.kind for g in self.gates).items()))

    def is_lowered(self) -> bool:
        return all(len(g.controls) <= 1 for g in self.gates)


# -- execution ---------------------------------------------------------------


def _apply_inplace(t: np.ndarray, gate: Gate, d: int) -> None:
    """Apply ``gate`` to a tensor of shape ``(d,)*width + (batch,)`` in place."""
    U = _cached_matrix(gate.inner, d)
    idx: list = [slice(None)] * t.ndim
    for c in gate.controls:
        idx[c] = d - 1
    idx = tuple(idx)
    axis = gate.target - sum(1 for c in gate.controls if c < gate.target)
    sub = t[idx]
    if isinstance(gate.inner, XdSpec):
        sl = [slice(None)] * sub.ndim
        sl[axis] = d - 1
        sub[tuple(sl)] *= U[d - 1, d - 1]
        return
    moved = np.moveaxis(sub, axis, 0)
    new = np.tensordot(U, moved, axes=(1, 0))
    t[idx] = np.moveaxis(new, 0, axis)


def _as_tensor(states: np.ndarray, circuit: Circuit) -> np.ndarray:
    states = np.asarray(states, dtype=complex)
    if states.shape[0] != circuit.dim:
        raise DimensionError(f"state dimension {states.shape[0]} != d^(n+aux) = {circuit.dim}")
    batch = states.shape[1] if states.ndim == 2 else 1
    return states.reshape((circuit.sys.d,) * circuit.width + (batch,)).copy()


def apply_gate(state: np.ndarray, gate: Gate, circuit_or_sys: Circuit | QuditSystem) -> np.ndarray:
    """Apply one gate to a state vector (or a batch of column states)."""
    circ = circuit_or_sys if isinstance(circuit_or_sys, Circuit) else Circuit(circuit_or_sys)
    width = circ.width
    if any(not 0 <= q < width for q in gate.qudits):
        raise DimensionError(f"gate on {gate.qudits} outside register of {width} qudits")
    state = np.asarray(state, dtype=complex)
    t = _as_tensor(state, circ)
    _apply_inplace(t, gate, circ.sys.d)
    return t.reshape(state.shape)


def simulate(circuit: Circuit, states: np.ndarray) -> np.ndarray:
    """Run every gate on a state vector or on the columns of a 2-D array."""
    states = np.asarray(states, dtype=complex)
    t = _as_tensor(states, circuit)
    d = circuit.sys.d
    for g in circuit.gates:
        _apply_inplace(t, g, d)
    return t.reshape(states.shape)


def circuit_to_matrix(circuit: Circuit, max_dim: int = MAX_MATRIX_DIM) -> np.ndarray:
    if circuit.dim > max_dim:
        raise DimensionError(f"circuit dimension {circuit.dim} exceeds cap {max_dim}")
    return simulate(circuit, np.eye(circuit.dim, dtype=complex))


def computational_indices(circuit: Circuit) -> np.ndarray:
    """Full-register indices whose ancilla digits are all 0, in computational order."""
    return np.arange(circuit.sys.N) * circuit.sys.d**circuit.aux


@dataclass
class SynthesisReport:
    global_phase: float
    max_deviation: float
    gate_counts: dict[str, int]
    ancilla_count: int
    ancilla_restoration_residual: float
    matches: bool = True
    tol: float = DEFAULT_TOL
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "global_phase": self.global_phase,
            "max_deviation": self.max_deviation,
            "counts": dict(self.gate_counts),
            "r": self.ancilla_count,
            "residual": self.ancilla_restoration_residual,
            "matches": self.matches,
            "tol": self.tol,
        }

    def lines(self) -> list[str]:
        out = [
            f"matches={str(self.matches).lower()}",
            f"global_phase={self.global_phase:.17g}",
            f"max_deviation={self.max_deviation:.17g}",
            f"ancilla_count={self.ancilla_count}",
            f"ancilla_residual={self.ancilla_restoration_residual:.17g}",
            f"gates_total={sum(self.gate_counts.values())}",
        ]
        out += [f"count_{k}={v}" for k, v in self.gate_counts.items()]
        return out


def restricted_operator(circuit: Circuit) -> tuple[np.ndarray, float]:
    """Circuit action on the ancilla-|0...0> subspace and the worst ancilla leakage.

    Only the ``N`` computational input columns are simulated.
    """
    N = circuit.sys.N
    cols = computational_indices(circuit)
    inputs = np.zeros((circuit.dim, N), dtype=complex)
    inputs[cols, np.arange(N)] = 1.0
    out = simulate(circuit, inputs)
    restricted = out[cols, :]
    kept = np.sum(np.abs(restricted) ** 2, axis=0)
    total = np.sum(np.abs(out) ** 2, axis=0)
    residual = float(np.max(np.abs(total - kept))) if N else 0.0
    return restricted, residual


def verify_synthesis(U: np.ndarray, circuit: Circuit, tol: float = 1e-8) -> SynthesisReport:
    U = np.asarray(U, dtype=complex)
    if U.shape != (circuit.sys.N, circuit.sys.N):
        raise DimensionError(f"unitary shape {U.shape} does not match d^n = {circuit.sys.N}")
    restricted, residual = restricted_operator(circuit)
    match = equal_up_to_global_phase(restricted, U, tol)
    return SynthesisReport(
        global_phase=match.phase,
        max_deviation=match.max_dev,
        gate_counts=circuit.gate_counts(),
        ancilla_count=circuit.aux,
        ancilla_restoration_residual=residual,
        matches=match.matches and residual <= tol,
        tol=tol,
    )


# -- circuit file format -----------------------------------------------------


def _params_to_json(spec: LocalSpec) -> dict:
    if isinstance(spec, ZdSpec):
        out: dict = {"coefficients": [complex_to_pair(c) for c in spec.coefficients]}
        if spec.adjoint:
            out["adjoint"] = True
        if spec.completion != "gram_schmidt":
            out["completion"] = spec.completion
        return out
    if isinstance(spec, XdSpec):
        return {"phase": spec.phase}
    return {"levels": [spec.p, spec.q]}


def _params_from_json(tag: str, params: dict) -> LocalSpec:
    if not isinstance(params, dict):
        raise FormatError("params must be an object")
    try:
        if tag == "Z":
            return ZdSpec(
                tuple(pair_to_complex(p) for p in params["coefficients"]),
                adjoint=bool(params.get("adjoint", False)),
                completion=params.get("completion", "gram_schmidt"),
            )
        if tag == "X":
            return XdSpec(float(params["phase"]))
        if tag == "P":
            p, q = params["levels"]
            return PdSpec(int(p), int(q))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad params for kind {tag}: {exc}") from exc
    raise FormatError(f"unknown gate tag {tag!r}")


def gate_to_dict(g: Gate) -> dict:
    rec: dict = {"kind": g.kind, "target": g.target}
    if g.controls:
        rec["controls"] = list(g.controls)
    rec["params"] = _params_to_json(g.inner)
    return rec


def gate_from_dict(rec: dict) -> Gate:
    try:
        kind = rec["kind"]
        target = int(rec["target"])
        controls = tuple(int(c) for c in rec.get("controls", ()))
        params = rec["params"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad gate record {rec!r}") from exc
    if not isinstance(kind, str) or kind not in {p + t for p in ("", "C2", "CN") for t in "ZXP"}:
        raise FormatError(f"unknown gate kind {kind!r}")
    prefix, tag = kind[:-1], kind[-1]
    expected = {"": lambda k: k == 0, "C2": lambda k: k == 1, "CN": lambda k: k >= 2}[prefix]
    if not expected(len(controls)):
        raise FormatError(f"kind {kind} inconsistent with {len(controls)} controls")
    try:
        return Gate(_params_from_json(tag, params), target, controls)
    except FormatError:
        raise
    except QuditError as exc:
        raise FormatError(str(exc)) from exc


def circuit_to_dict(c: Circuit) -> dict:
    return {
        "d": c.sys.d,
        "n": c.sys.n,
        "aux": c.aux,
        "gates": [gate_to_dict(g) for g in c.gates],
    }


def circuit_from_dict(doc: dict) -> Circuit:
    try:
        sys = QuditSystem(int(doc["d"]), int(doc["n"]))
        aux = int(doc.get("aux", 0))
        records = doc["gates"]
    except (KeyError, TypeError, ValueError, QuditError) as exc:
        raise FormatError(f"circuit document needs d, n, aux and gates: {exc}") from exc
    if not isinstance(records, list):
        raise FormatError("gates must be an array")
    try:
        return Circuit(sys, tuple(gate_from_dict(r) for r in records), aux)
    except FormatError:
        raise
    except QuditError as exc:
        raise FormatError(str(exc)) from exc


def dumps_circuit(c: Circuit) -> str:
    return json.dumps(circuit_to_dict(c))


def loads_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("circuit document must be a JSON object")
    return circuit_from_dict(doc)


def local(inner: LocalSpec, target: int) -> Gate:
    return Gate(inner, target)


def controlled(inner: LocalSpec, controls: Iterable[int], target: int) -> Gate:
    return Gate(inner, target, tuple(controls))
