import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quditlogic.circuit import Circuit, Gate, circuit_to_matrix, restricted_operator
from quditlogic.core import QuditSystem, equal_up_to_global_phase, random_state, random_unitary, spectral_decompose
from quditlogic.errors import CapacityError, DimensionError, NonUnitaryError, UnsupportedConfigurationError
from quditlogic.gates import XdSpec, ZdSpec, gamman_matrix
from quditlogic.synthesis import (
    SynthesisOptions,
    ancillas_needed,
    estimate_resources,
    lower_circuit,
    synthesize_basis_permutation,
    synthesize_gamman,
    synthesize_unitary,
    synthesize_wm,
    synthesize_zm,
)

small_systems = st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 2), (3, 3)])


@given(small_systems, st.data())
def test_basis_permutation_is_a_transposition(dn, data):
    sys = QuditSystem(*dn)
    j = data.draw(st.integers(0, sys.N - 1))
    k = data.draw(st.integers(0, sys.N - 1))
    M = circuit_to_matrix(synthesize_basis_permutation(sys.digits(j), sys.digits(k), sys))
    expected = np.eye(sys.N)
    expected[[j, k]] = expected[[k, j]]
    assert np.max(np.abs(M - expected)) < 1e-12


def test_basis_permutation_validates_digits():
    sys = QuditSystem(3, 2)
    with pytest.raises(DimensionError):
        synthesize_basis_permutation([0], [1, 1], sys)
    with pytest.raises(DimensionError):
        synthesize_basis_permutation([0, 3], [1, 1], sys)


@given(small_systems, st.integers(0, 10_000))
def test_zm_rotates_vector_to_last_basis_state(dn, seed):
    sys = QuditSystem(*dn)
    psi = random_state(sys.N, seed)
    c = synthesize_zm(psi, sys)
    out = circuit_to_matrix(c) @ psi
    assert abs(abs(out[-1]) - 1) < 1e-10


def test_zm_sparse_vectors():
    sys = QuditSystem(3, 2)
    for k in range(sys.N):
        e = np.zeros(sys.N, dtype=complex)
        e[k] = 1
        out = circuit_to_matrix(synthesize_zm(e, sys)) @ e
        assert abs(abs(out[-1]) - 1) < 1e-12
    assert len(synthesize_zm(np.eye(sys.N)[-1], sys)) == 0


def wm_oracle(phase, v):
    return np.eye(v.size) + (np.exp(1j * phase) - 1) * np.outer(v, v.conj())


@pytest.mark.parametrize("dn", [(3, 1), (2, 2), (3, 2), (4, 2)])
def test_wm_is_a_single_eigenphase_factor(dn):
    sys = QuditSystem(*dn)
    v = random_state(sys.N, 1)
    W = circuit_to_matrix(synthesize_wm(0.8, v, sys))
    assert np.max(np.abs(W - wm_oracle(0.8, v))) < 1e-10


def test_wm_independent_of_completion():
    sys = QuditSystem(3, 2)
    v = random_state(9, 4)
    a = circuit_to_matrix(synthesize_wm(-1.3, v, sys, "gram_schmidt"))
    b = circuit_to_matrix(synthesize_wm(-1.3, v, sys, "householder"))
    assert np.max(np.abs(a - b)) < 1e-10


def test_ancilla_count_formula():
    for d in range(3, 7):
        assert ancillas_needed(0, d) == 0
        assert ancillas_needed(1, d) == 0
        for m in range(2, 12):
            assert ancillas_needed(m, d) == math.ceil((m - 1) / (d - 2))
    assert ancillas_needed(1, 2) == 0
    with pytest.raises(UnsupportedConfigurationError):
        ancillas_needed(2, 2)


@pytest.mark.parametrize("d,n", [(3, 3), (3, 4), (4, 4), (3, 5), (5, 4), (4, 5)])
@pytest.mark.parametrize("inner", [XdSpec(1.234), ZdSpec.from_vector([1, 2j, -1, 0.5, 3][:3])])
def test_gamman_lowering(d, n, inner):
    if isinstance(inner, ZdSpec) and inner.d != d:
        inner = ZdSpec.from_vector(np.arange(1, d + 1) * np.exp(1j * np.arange(d)))
    sys = QuditSystem(d, n)
    controls, target = list(range(n - 1)), n - 1
    circuit, r = synthesize_gamman(sys, controls, target, inner, n)
    assert r == math.ceil((n - 2) / (d - 2))
    assert circuit.aux == r and circuit.is_lowered()
    R, residual = restricted_operator(circuit)
    assert residual < 1e-12
    expected = gamman_matrix(sys, controls, target, inner.matrix(d))
    assert np.max(np.abs(R - expected)) < 1e-10


def test_gamman_lowering_scrambled_qudits():
    sys = QuditSystem(3, 4)
    circuit, r = synthesize_gamman(sys, [3, 0, 2], 1, XdSpec(0.3), 4)
    R, residual = restricted_operator(circuit)
    assert residual < 1e-12
    assert np.allclose(R, gamman_matrix(sys, [3, 0, 2], 1, XdSpec(0.3).matrix(3)))


def test_gamman_capacity():
    sys = QuditSystem(3, 4)
    with pytest.raises(CapacityError):
        synthesize_gamman(sys, [0, 1, 2], 3, XdSpec(0.3), 4, aux_available=1)


def test_lower_circuit_reuses_ancillas():
    sys = QuditSystem(3, 3)
    g = [
        Gate(XdSpec(0.5), 2, (0, 1)),
        Gate(XdSpec(-0.2), 0, (2, 1)),
    ]
    high = Circuit(sys, tuple(g))
    low = lower_circuit(high)
    assert low.aux == 1 and low.is_lowered()
    R, residual = restricted_operator(low)
    assert residual < 1e-12
    assert np.allclose(R, circuit_to_matrix(high))


@pytest.mark.parametrize("dn", [(3, 1), (5, 1), (2, 2), (3, 2), (2, 1)])
def test_synthesize_random_unitary(dn):
    sys = QuditSystem(*dn)
    U = random_unitary(sys.N, 3)
    circuit, report = synthesize_unitary(U, sys)
    assert report.matches, report
    assert report.max_deviation < 1e-10
    assert circuit.is_lowered()


def test_synthesize_three_qutrits_uses_one_ancilla():
    sys = QuditSystem(3, 3)
    U = random_unitary(27, 0)
    circuit, report = synthesize_unitary(U, sys)
    assert report.matches and report.ancilla_count == 1
    assert report.ancilla_restoration_residual < 1e-12


@pytest.mark.parametrize(
    "U",
    [
        np.eye(9),
        np.diag(np.exp(1j * np.arange(9))),
        np.eye(9)[np.random.default_rng(2).permutation(9)],
        np.exp(0.4j) * np.eye(9),
    ],
    ids=["identity", "diagonal", "permutation", "scalar"],
)
def test_synthesize_structured_unitaries(U):
    sys = QuditSystem(3, 2)
    circuit, report = synthesize_unitary(U, sys)
    assert report.matches
    if np.allclose(U, np.eye(9)):
        assert len(circuit) == 0


def test_degenerate_spectrum():
    v = random_state(9, 5)
    U = np.eye(9) - 2 * np.outer(v, v.conj())
    _, report = synthesize_unitary(U, QuditSystem(3, 2))
    assert report.matches


def test_no_lower_keeps_gamman():
    sys = QuditSystem(3, 3)
    circuit, report = synthesize_unitary(random_unitary(27, 1), sys, SynthesisOptions(lower_to_two_qudit=False))
    assert report.matches and circuit.aux == 0 and not circuit.is_lowered()


def test_binary_three_qubits():
    sys = QuditSystem(2, 3)
    U = random_unitary(8, 0)
    with pytest.raises(UnsupportedConfigurationError):
        synthesize_unitary(U, sys)
    _, report = synthesize_unitary(U, sys, SynthesisOptions(lower_to_two_qudit=False))
    assert report.matches


def test_input_validation():
    with pytest.raises(NonUnitaryError):
        synthesize_unitary(np.ones((3, 3)), QuditSystem(3, 1))
    with pytest.raises(DimensionError):
        synthesize_unitary(np.eye(4), QuditSystem(3, 1))


def test_eigenphase_factors_multiply_to_u():
    sys = QuditSystem(2, 2)
    U = random_unitary(4, 9)
    phases, vecs = spectral_decompose(U)
    W = np.eye(4, dtype=complex)
    for m in range(4):
        W = circuit_to_matrix(synthesize_wm(phases[m], vecs[:, m], sys)) @ W
    assert equal_up_to_global_phase(W, U, 1e-10).matches
    # factors commute, so the product is exact without a global phase
    assert np.max(np.abs(W - U)) < 1e-10


@pytest.mark.parametrize(
    "N,d,n,n2,ratio",
    [(4096, 8, 4, 12, 9), (4096, 2, 12, 12, 1), (4096, 4, 6, 12, 4), (729, 3, 6, None, None), (1, 5, 0, 0, None)],
)
def test_resource_estimates(N, d, n, n2, ratio):
    est = estimate_resources(N, d)
    assert est.n == n and isinstance(est.n, int)
    if n2 is not None:
        assert est.n2 == n2
    expected_ratio = ratio if ratio is not None else math.log2(d) ** 2
    assert est.time_ratio == pytest.approx(expected_ratio, rel=1e-15)


@given(st.integers(2, 10**6), st.integers(2, 16))
def test_resource_estimate_consistency(N, d):
    est = estimate_resources(N, d)
    assert est.n == pytest.approx(math.log2(N) / math.log2(d), rel=1e-12)
    assert est.n2 == pytest.approx(est.n * math.log2(d), rel=1e-12)
    assert est.time_ratio == pytest.approx(math.log2(d) ** 2, rel=1e-12)
