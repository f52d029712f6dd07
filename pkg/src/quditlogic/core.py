"""Dense linear-algebra primitives for qudit registers.

Matrices and state vectors are plain ``numpy`` complex arrays. Basis states of
an ``n``-qudit register are ordered lexicographically in their base-``d``
digits, with qudit 0 the most significant digit, so ``np.kron`` realizes the
tensor-product basis directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, FormatError, NonUnitaryError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class QuditSystem:
    """Register of ``n`` qudits with ``d`` levels each."""

    d: int
    n: int

    def __post_init__(self):
        if self.d < 2:
            raise DimensionError(f"d must be >= 2, got {self.d}")
        if self.n < 1:
            raise DimensionError(f"n must be >= 1, got {self.n}")

    @property
    def N(self) -> int:
        return self.d**self.n

    def digits(self, k: int) -> list[int]:
        return base_d_digits(k, self)

    def index(self, digits: Sequence[int]) -> int:
        return digits_to_index(digits, self.d)

    def extended(self, extra: int) -> "QuditSystem":
        """The same register with ``extra`` qudits appended (ancillas)."""
        return QuditSystem(self.d, self.n + extra)


def base_d_digits(k: int, sys: QuditSystem) -> list[int]:
    """Digits ``[k_1, ..., k_n]`` of ``k`` in base ``d``, most significant first.

    >>> base_d_digits(5, QuditSystem(3, 3))
    [0, 1, 2]
    """
    if not 0 <= k < sys.N:
        raise DimensionError(f"index {k} out of range [0, {sys.N})")
    out = [0] * sys.n
    for i in range(sys.n - 1, -1, -1):
        k, out[i] = divmod(k, sys.d)
    return out


def digits_to_index(digits: Sequence[int], d: int) -> int:
    k = 0
    for digit in digits:
        if not 0 <= digit < d:
            raise DimensionError(f"digit {digit} out of range for d={d}")
        k = k * d + int(digit)
    return k


def wrap_phase(x: float) -> float:
    """Reduce an angle to the principal branch (-pi, pi]."""
    y = math.remainder(float(x), 2 * math.pi)
    if y <= -math.pi:
        y += 2 * math.pi
    return y


def unitarity_deviation(M: np.ndarray) -> float:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return math.inf
    return float(np.max(np.abs(M.conj().T @ M - np.eye(M.shape[0]))))


def is_unitary(M: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return unitarity_deviation(M) <= tol


def check_unitary(M: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``M`` as a complex array or raise :class:`NonUnitaryError`."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    dev = unitarity_deviation(M)
    if dev > tol:
        raise NonUnitaryError(dev, tol)
    return M


def spectral_decompose(U: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases and orthonormal eigenvectors of a unitary.

    Returns ``(phases, vecs)`` with ``U = vecs @ diag(exp(1j*phases)) @ vecs^dag``.
    Phases lie in (-pi, pi] and are sorted ascending; equal phases keep the
    order in which the Schur form produced them. ``vecs[:, m]`` is the m-th
    eigenvector.

    The complex Schur form of a normal matrix is diagonal, so its unitary
    factor is an orthonormal eigenbasis even inside degenerate eigenspaces.
    """
    U = check_unitary(U, tol)
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.array([wrap_phase(np.angle(t)) for t in np.diag(T)])
    order = np.argsort(phases, kind="stable")
    return phases[order], Z[:, order]


def reconstruct(phases: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    return (vecs * np.exp(1j * np.asarray(phases))) @ vecs.conj().T


class PhaseMatch(NamedTuple):
    matches: bool
    phase: float
    max_dev: float


def equal_up_to_global_phase(A: np.ndarray, B: np.ndarray, tol: float = DEFAULT_TOL) -> PhaseMatch:
    """Compare ``exp(i*theta) A`` against ``B``.

    ``theta`` is read off the entry where ``|A|`` is largest; ties go to the
    first such entry in row-major order.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    if A.size == 0:
        return PhaseMatch(True, 0.0, 0.0)
    idx = np.unravel_index(np.argmax(np.abs(A)), A.shape)
    if abs(A[idx]) == 0 or abs(B[idx]) == 0:
        theta = 0.0
    else:
        theta = wrap_phase(np.angle(B[idx]) - np.angle(A[idx]))
    dev = float(np.max(np.abs(np.exp(1j * theta) * A - B)))
    return PhaseMatch(dev <= tol, theta, dev)


def tensor_product(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor is the most significant qudit."""
    if not mats:
        return np.ones((1, 1), dtype=complex)
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def embed_local(G: np.ndarray, qudit: int, sys: QuditSystem) -> np.ndarray:
    """``I^{(qudit)} (x) G (x) I^{(n-qudit-1)}`` on the full register."""
    if not 0 <= qudit < sys.n:
        raise DimensionError(f"qudit {qudit} out of range for n={sys.n}")
    eye = np.eye(sys.d, dtype=complex)
    return tensor_product(*[G if i == qudit else eye for i in range(sys.n)])


def random_unitary(N: int, seed: int) -> np.ndarray:
    """Haar-random unitary from the QR factorization of a complex Ginibre matrix."""
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_state(N: int, seed: int | np.random.Generator) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return v / np.linalg.norm(v)


def basis_state(k: int, N: int) -> np.ndarray:
    v = np.zeros(N, dtype=complex)
    v[k] = 1.0
    return v


# -- unitary file format ---------------------------------------------------


def complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def pair_to_complex(p) -> complex:
    if not isinstance(p, (list, tuple)) or len(p) != 2:
        raise FormatError(f"expected [re, im] pair, got {p!r}")
    try:
        return complex(float(p[0]), float(p[1]))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"non-numeric entry {p!r}") from exc


def unitary_to_dict(U: np.ndarray, sys: QuditSystem) -> dict:
    U = np.asarray(U, dtype=complex)
    if U.shape != (sys.N, sys.N):
        raise DimensionError(f"matrix shape {U.shape} does not match d^n = {sys.N}")
    return {
        "d": sys.d,
        "n": sys.n,
        "matrix": [[complex_to_pair(z) for z in row] for row in U],
    }


def unitary_from_dict(doc: dict) -> tuple[QuditSystem, np.ndarray]:
    try:
        d, n, rows = int(doc["d"]), int(doc["n"]), doc["matrix"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"unitary document needs integer d, n and a matrix: {exc}") from exc
    try:
        sys = QuditSystem(d, n)
    except DimensionError as exc:
        raise FormatError(str(exc)) from exc
    if not isinstance(rows, list) or len(rows) != sys.N:
        raise FormatError(f"matrix must have d^n = {sys.N} rows")
    U = np.empty((sys.N, sys.N), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != sys.N:
            raise FormatError(f"row {i} must have d^n = {sys.N} entries")
        U[i] = [pair_to_complex(p) for p in row]
    return sys, U


def dumps_unitary(U: np.ndarray, sys: QuditSystem) -> str:
    return json.dumps(unitary_to_dict(U, sys))


def loads_unitary(text: str) -> tuple[QuditSystem, np.ndarray]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("unitary document must be a JSON object")
    return unitary_from_dict(doc)
