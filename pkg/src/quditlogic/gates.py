"""Elementary multi-valued gates as explicit matrices.

The gate family consists of the state-reducing gate ``Z_d`` (maps a chosen
superposition onto ``|d-1>``), the phase gate ``X_d`` (advances ``|d-1>``),
the level transposition ``P_d`` assembled from the two, and their controlled
versions ``Gamma_2`` / ``Gamma_n`` which fire only when every control qudit
sits in ``|d-1>``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .core import DEFAULT_TOL, QuditSystem, check_unitary, wrap_phase
from .errors import DimensionError, NormalizationError

COMPLETIONS = ("gram_schmidt", "householder")

# A completion vector is accepted only if its residual after projection is
# at least this long; smaller ones are treated as linearly dependent.
_DEPENDENCE_CUTOFF = 1e-6


def _arg(z: complex) -> float:
    # arg(0) := 0
    return 0.0 if z == 0 else cmath.phase(z)


@dataclass(frozen=True)
class ZdSpec:
    """Parameters of ``Z_d(c_0, ..., c_{d-1})``.

    ``adjoint`` selects ``Z_d^dagger``; ``completion`` picks how the rows not
    fixed by the defining action are filled in.
    """

    coefficients: tuple[complex, ...]
    adjoint: bool = False
    completion: str = "gram_schmidt"

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 2:
            raise DimensionError("Z_d needs at least two coefficients")
        norm = math.fsum(abs(c) ** 2 for c in coeffs)
        if abs(norm - 1.0) > DEFAULT_TOL:
            raise NormalizationError(f"coefficients have squared norm {norm!r}, expected 1")
        if self.completion not in COMPLETIONS:
            raise ValueError(f"unknown completion {self.completion!r}")

    @property
    def d(self) -> int:
        return len(self.coefficients)

    @classmethod
    def from_vector(cls, v: Sequence[complex], **kw) -> "ZdSpec":
        v = np.asarray(v, dtype=complex)
        return cls(tuple(v / np.linalg.norm(v)), **kw)

    def inverse(self) -> "ZdSpec":
        return ZdSpec(self.coefficients, not self.adjoint, self.completion)

    def matrix(self, d: int | None = None) -> np.ndarray:
        if d is not None and d != self.d:
            raise DimensionError(f"Z spec has {self.d} levels, register has {d}")
        return _cached_matrix(self, self.d).copy()


@dataclass(frozen=True)
class XdSpec:
    """Phase advance of ``|d-1>`` by ``phase`` radians (stored in (-pi, pi])."""

    phase: float

    def __post_init__(self):
        object.__setattr__(self, "phase", wrap_phase(self.phase))

    def inverse(self) -> "XdSpec":
        return XdSpec(-self.phase)

    def matrix(self, d: int) -> np.ndarray:
        return _cached_matrix(self, d).copy()


@dataclass(frozen=True)
class PdSpec:
    """Transposition of levels ``p`` and ``q``, normalized to ``p < q``."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if p == q:
            raise DimensionError(f"P_d needs two distinct levels, got p = q = {p}")
        if min(p, q) < 0:
            raise DimensionError("level indices must be non-negative")
        object.__setattr__(self, "p", min(p, q))
        object.__setattr__(self, "q", max(p, q))

    def inverse(self) -> "PdSpec":
        return self

    def matrix(self, d: int) -> np.ndarray:
        return _cached_matrix(self, d).copy()


LocalSpec = Union[ZdSpec, XdSpec, PdSpec]


@lru_cache(maxsize=8192)
def _cached_matrix(spec: LocalSpec, d: int) -> np.ndarray:
    if isinstance(spec, ZdSpec):
        Z = zd_matrix(d, spec.coefficients, completion=spec.completion)
        return Z.conj().T if spec.adjoint else Z
    if isinstance(spec, XdSpec):
        return xd_matrix(d, spec.phase)
    if isinstance(spec, PdSpec):
        return pd_matrix(d, spec.p, spec.q)
    raise TypeError(f"not a gate spec: {spec!r}")


# -- binary reference family -------------------------------------------------


def y2_matrix(lam: float, nu: float, phi: float) -> np.ndarray:
    c, s = math.cos(lam), math.sin(lam)
    return np.array(
        [
            [c, -cmath.exp(1j * nu) * s],
            [cmath.exp(1j * (phi - nu)) * s, cmath.exp(1j * phi) * c],
        ],
        dtype=complex,
    )


def z2_params(c0: complex, c1: complex, tol: float = DEFAULT_TOL) -> tuple[float, float, float]:
    """``(lambda, nu, phi)`` such that ``y2_matrix`` maps ``c0|0> + c1|1>`` to ``|1>``."""
    norm = abs(c0) ** 2 + abs(c1) ** 2
    if abs(norm - 1.0) > tol:
        raise NormalizationError(f"|c0|^2 + |c1|^2 = {norm!r}, expected 1")
    lam = math.acos(min(1.0, abs(c1)))
    return lam, _arg(c0 * c1.conjugate()), _arg(c1.conjugate())


# -- single-qudit gates --------------------------------------------------------


def xd_matrix(d: int, phi: float) -> np.ndarray:
    if d < 2:
        raise DimensionError(f"d must be >= 2, got {d}")
    X = np.eye(d, dtype=complex)
    X[d - 1, d - 1] = cmath.exp(1j * phi)
    return X


def _gram_schmidt_completion(psi: np.ndarray) -> np.ndarray:
    d = psi.size
    basis = [psi]
    for k in range(d):
        if len(basis) == d:
            break
        v = np.zeros(d, dtype=complex)
        v[k] = 1.0
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for b in basis:
                v = v - b * np.vdot(b, v)
        nv = np.linalg.norm(v)
        if nv < _DEPENDENCE_CUTOFF:
            continue
        basis.append(v / nv)
    rows = basis[1:] + basis[:1]
    return np.array([r.conj() for r in rows])


def _householder_completion(psi: np.ndarray) -> np.ndarray:
    # Reflection taking psi to e^{i a} e_{d-1}, with a chosen to avoid cancellation.
    d = psi.size
    last = psi[d - 1]
    alpha = -cmath.exp(1j * _arg(last))
    target = np.zeros(d, dtype=complex)
    target[d - 1] = alpha
    w = psi - target
    nw = np.linalg.norm(w)
    if nw < 1e-15:
        return np.eye(d, dtype=complex)
    w = w / nw
    return np.eye(d, dtype=complex) - 2.0 * np.outer(w, w.conj())


def zd_matrix(d: int, coefficients: Sequence[complex], completion: str = "gram_schmidt") -> np.ndarray:
    """A unitary ``Z`` with ``Z @ psi`` proportional to ``e_{d-1}``.

    With the default Gram-Schmidt completion the last row is ``psi^dagger``
    (so ``Z psi = e_{d-1}`` exactly) and rows ``0..d-2`` are the standard
    basis vectors orthonormalized against ``psi`` in index order, the one that
    becomes dependent being skipped.
    """
    psi = np.asarray(coefficients, dtype=complex)
    if psi.shape != (d,):
        raise DimensionError(f"expected {d} coefficients, got {psi.shape}")
    norm = float(np.vdot(psi, psi).real)
    if abs(norm - 1.0) > DEFAULT_TOL:
        raise NormalizationError(f"coefficients have squared norm {norm!r}, expected 1")
    if completion == "gram_schmidt":
        return _gram_schmidt_completion(psi)
    if completion == "householder":
        return _householder_completion(psi)
    raise ValueError(f"unknown completion {completion!r}")


def pd_matrix(d: int, p: int, q: int) -> np.ndarray:
    """``Z_d^dagger X_d(pi) Z_d`` with ``c_p = -c_q = 1/sqrt 2``: swaps ``|p>`` and ``|q>``."""
    if p == q:
        raise DimensionError(f"P_d needs two distinct levels, got p = q = {p}")
    if not (0 <= p < d and 0 <= q < d):
        raise DimensionError(f"levels ({p}, {q}) out of range for d={d}")
    c = np.zeros(d, dtype=complex)
    c[p] = 1 / math.sqrt(2)
    c[q] = -1 / math.sqrt(2)
    Z = zd_matrix(d, c)
    return Z.conj().T @ xd_matrix(d, math.pi) @ Z


def transposition_matrix(d: int, p: int, q: int) -> np.ndarray:
    T = np.eye(d, dtype=complex)
    T[[p, q]] = T[[q, p]]
    return T


# -- controlled gates ----------------------------------------------------------


def gamma2_matrix(d: int, Y: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Block-diagonal ``diag(1_{d^2-d}, Y)`` on two qudits."""
    Y = check_unitary(Y, tol)
    if Y.shape != (d, d):
        raise DimensionError(f"Y must be {d}x{d}, got {Y.shape}")
    G = np.eye(d * d, dtype=complex)
    G[d * d - d :, d * d - d :] = Y
    return G


def gamman_matrix(
    sys: QuditSystem,
    controls: Sequence[int],
    target: int,
    Y: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Apply ``Y`` to ``target`` iff every qudit in ``controls`` is in ``|d-1>``.

    Assembled directly from basis indices, independently of the circuit
    simulator.
    """
    d, n = sys.d, sys.n
    Y = check_unitary(Y, tol)
    if Y.shape != (d, d):
        raise DimensionError(f"Y must be {d}x{d}, got {Y.shape}")
    controls = list(controls)
    if not 0 <= target < n or any(not 0 <= c < n for c in controls):
        raise DimensionError("qudit index out of range")
    if target in controls or len(set(controls)) != len(controls):
        raise DimensionError("controls and target must be distinct")
    G = np.eye(sys.N, dtype=complex)
    stride = d ** (n - 1 - target)
    for k in range(sys.N):
        digits = sys.digits(k)
        if digits[target] != 0 or any(digits[c] != d - 1 for c in controls):
            continue
        idx = [k + t * stride for t in range(d)]
        G[np.ix_(idx, idx)] = Y
    return G
