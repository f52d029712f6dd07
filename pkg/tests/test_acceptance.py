"""End-to-end acceptance checks, one test per criterion, at their stated tolerances."""

import math
import time

import numpy as np
import pytest

from quditlogic.circuit import restricted_operator, simulate
from quditlogic.core import QuditSystem, equal_up_to_global_phase, random_state, random_unitary, spectral_decompose
from quditlogic.gates import XdSpec, ZdSpec, gamma2_matrix, gamman_matrix, pd_matrix, transposition_matrix, xd_matrix
from quditlogic.iontrap.hamiltonians import binary_v_closed_form, evolve, hamiltonian_v, ternary_v_closed_form
from quditlogic.iontrap.model import LevelScheme, TrapConfig
from quditlogic.iontrap.protocol import gamma2_protocol
from quditlogic.iontrap.solvers import (
    OptimizerConfig,
    infidelity,
    solve_z2_controls,
    solve_z3_controls,
    solve_z_controls,
    solve_zd_controls,
    target_overlap,
)
from quditlogic.synthesis import estimate_resources, synthesize_unitary, synthesize_wm

GRID = [(3, 1), (5, 1), (3, 2), (4, 2), (3, 3)]
PER_SYSTEM = 10
GATE_COUNT_C = 20


@pytest.fixture(scope="module")
def universality_runs():
    runs = []
    start = time.perf_counter()
    for d, n in GRID:
        sys = QuditSystem(d, n)
        for seed in range(PER_SYSTEM):
            U = random_unitary(sys.N, 1000 * d + 100 * n + seed)
            circuit, report = synthesize_unitary(U, sys)
            runs.append((sys, circuit, report))
    return runs, time.perf_counter() - start


def test_criterion_1_universality(acceptance, universality_runs):
    runs, elapsed = universality_runs
    worst_dev = max(r.max_deviation for _, _, r in runs)
    worst_res = max(r.ancilla_restoration_residual for _, _, r in runs)
    lowered = all(c.is_lowered() for _, c, _ in runs)
    ok = (
        len(runs) == 50
        and lowered
        and all(r.matches for _, _, r in runs)
        and worst_dev < 1e-8
        and worst_res < 1e-12
        and elapsed < 300
    )
    assert acceptance(
        1, ok, f"{len(runs)} unitaries, max deviation {worst_dev:.2e}, ancilla residual {worst_res:.2e}, {elapsed:.1f}s"
    )


def test_criterion_2_gamman_lowering(acceptance):
    from quditlogic.synthesis import synthesize_gamman

    rows = []
    ok = True
    for n, d in [(3, 3), (4, 3), (4, 4), (5, 3)]:
        sys = QuditSystem(d, n)
        expected_r = math.ceil((n - 2) / (d - 2))
        for inner in (XdSpec(0.77), ZdSpec(tuple(random_state(d, n)))):
            circuit, r = synthesize_gamman(sys, list(range(n - 1)), n - 1, inner, n)
            R, residual = restricted_operator(circuit)
            dev = float(np.max(np.abs(R - gamman_matrix(sys, range(n - 1), n - 1, inner.matrix(d)))))
            ok &= r == expected_r and circuit.aux == r and circuit.is_lowered() and dev < 1e-10 and residual < 1e-10
            rows.append(f"(n={n},d={d}) r={r} dev={dev:.1e}")
    assert acceptance(2, ok, "; ".join(rows[::2]))


def test_criterion_3_permutation_identity(acceptance):
    worst = 0.0
    for d in range(2, 7):
        for p in range(d):
            for q in range(p + 1, d):
                m = equal_up_to_global_phase(pd_matrix(d, p, q), transposition_matrix(d, p, q), 1e-12)
                worst = max(worst, m.max_dev)
    assert acceptance(3, worst < 1e-12, f"max deviation {worst:.2e} over all p<q, d=2..6")


def test_criterion_4_eigenphase_factors(acceptance):
    rng = np.random.default_rng(4)
    worst_gain = worst_probe = worst_completion = 0.0
    factors = 0
    for d, n in GRID:
        sys = QuditSystem(d, n)
        U = random_unitary(sys.N, 77 + d + n)
        phases, vecs = spectral_decompose(U)
        for m in range(sys.N):
            v = vecs[:, m]
            probes = rng.standard_normal((sys.N, 20)) + 1j * rng.standard_normal((sys.N, 20))
            probes -= np.outer(v, v.conj() @ probes)
            probes /= np.linalg.norm(probes, axis=0)
            inputs = np.column_stack([v, probes])
            outs = []
            for completion in ("gram_schmidt", "householder"):
                W = synthesize_wm(phases[m], v, sys, completion)
                outs.append(simulate(W, inputs))
            a, b = outs
            worst_gain = max(worst_gain, float(np.max(np.abs(a[:, 0] - np.exp(1j * phases[m]) * v))))
            worst_probe = max(worst_probe, float(np.max(np.abs(a[:, 1:] - probes))))
            worst_completion = max(worst_completion, float(np.max(np.abs(a - b))))
            factors += 1
    ok = max(worst_gain, worst_probe, worst_completion) < 1e-10
    assert acceptance(
        4,
        ok,
        f"{factors} factors: eigvec {worst_gain:.1e}, probes {worst_probe:.1e}, completions {worst_completion:.1e}",
    )


def test_criterion_5_closed_form_pulses(acceptance):
    rng = np.random.default_rng(5)
    s2, s3 = LevelScheme.default(2), LevelScheme.default(3)
    worst_matrix = 0.0
    for _ in range(100):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        t = rng.uniform(0.0, 4 * math.pi)
        worst_matrix = max(worst_matrix, np.max(np.abs(evolve(hamiltonian_v(s2, [a]), t) - binary_v_closed_form(a, t))))
        worst_matrix = max(
            worst_matrix, np.max(np.abs(evolve(hamiltonian_v(s3, [a, b]), t) - ternary_v_closed_form(a, b, t)))
        )
    worst_overlap = 1.0
    for d, solver in ((2, solve_z2_controls), (3, solve_z3_controls)):
        for _ in range(100):
            c = random_state(d, rng)
            worst_overlap = min(worst_overlap, abs(target_overlap(solver(*c), c)))
    ok = worst_matrix < 1e-12 and worst_overlap >= 1 - 1e-9
    assert acceptance(5, ok, f"closed-form matrices {worst_matrix:.1e}, min overlap 1-{1 - worst_overlap:.1e}")


def test_criterion_6_general_inversion(acceptance):
    rng = np.random.default_rng(6)
    worst = {}
    start = time.perf_counter()
    for d in (4, 5, 6):
        infs = [solve_zd_controls(random_state(d, rng), OptimizerConfig(seed=k)).infidelity for k in range(20)]
        worst[d] = max(infs)
    gap = 0.0
    for d in (2, 3):
        scheme = LevelScheme.default(d)
        for k in range(20):
            c = random_state(d, rng)
            closed = solve_z_controls(c)
            assert closed.method == "closed_form"
            opt = solve_zd_controls(c, OptimizerConfig(seed=k))
            gap = max(gap, abs(opt.infidelity - infidelity(closed.segment, c, scheme)))
    ok = all(v < 1e-6 for v in worst.values()) and gap < 1e-6
    detail = ", ".join(f"d={d} worst {v:.1e}" for d, v in worst.items())
    assert acceptance(6, ok, f"{detail}; d=2,3 gap {gap:.1e}; {time.perf_counter() - start:.0f}s")


def test_criterion_7_two_ion_protocol(acceptance):
    scheme, trap = LevelScheme.default(3), TrapConfig()
    psi = random_state(3, 7)
    cases = [("Z3(psi)", "Z", psi), ("X3(pi)", "X", math.pi), ("X3(pi/2)", "X", math.pi / 2)]
    ok = True
    parts = []
    for name, kind, params in cases:
        r = gamma2_protocol(scheme, trap, kind, params)
        Y = r.y_matrix
        if kind == "Z":
            ok &= abs(abs((Y @ psi)[-1]) - 1) < 1e-9
        else:
            ok &= equal_up_to_global_phase(Y, xd_matrix(3, params), 1e-8).matches
        m = equal_up_to_global_phase(r.restricted, gamma2_matrix(3, Y), 1e-8)
        leak = max(r.leakage, r.cutoff_population)
        ok &= m.matches and leak < 1e-10
        parts.append(f"{name} dev {m.max_dev:.1e} leak {leak:.1e}")
    assert acceptance(7, ok, "; ".join(parts))


def test_criterion_8_resources(acceptance, universality_runs):
    exact = True
    for d in range(2, 9):
        for k in range(0, 7):
            est = estimate_resources(d**k, d)
            exact &= est.n == k and isinstance(est.n, int)
            d2 = math.log2(d)
            exact &= est.time_ratio == (d2 * d2 if d & (d - 1) else round(d2) ** 2)
    runs, _ = universality_runs
    worst_ratio = max(sum(r.gate_counts.values()) / (s.n**2 * s.N**2) for s, _, r in runs)
    ok = exact and worst_ratio <= GATE_COUNT_C
    assert acceptance(8, ok, f"exact powers reproduced: {exact}; max count/(n^2 N^2) = {worst_ratio:.2f} <= C={GATE_COUNT_C}")
