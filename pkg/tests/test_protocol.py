import math

import numpy as np
import pytest

from quditlogic.core import equal_up_to_global_phase, random_state, unitarity_deviation
from quditlogic.errors import UnsupportedConfigurationError
from quditlogic.gates import gamma2_matrix, xd_matrix
from quditlogic.iontrap.model import LevelScheme, TrapConfig, loads_program, dumps_program
from quditlogic.iontrap.protocol import (
    computational_indices,
    gamma2_protocol,
    program_operator,
    stage12_expected,
    stage12_state,
)


def _aux_below(d):
    e = LevelScheme.default(d).energies
    return LevelScheme(e, tuple(x - 80 - 2.1 * j for j, x in enumerate(e)), 200.0)


@pytest.mark.parametrize("scheme", [LevelScheme.default(3), _aux_below(3)], ids=["aux-above", "aux-below"])
@pytest.mark.parametrize("phi", [math.pi, math.pi / 2, -0.4])
def test_phase_gate_protocol(scheme, phi):
    r = gamma2_protocol(scheme, TrapConfig(), "X", phi)
    m = equal_up_to_global_phase(r.restricted, gamma2_matrix(3, xd_matrix(3, phi)), 1e-8)
    assert m.matches, m
    assert r.leakage < 1e-10 and r.cutoff_population < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4])
def test_z_protocol(d):
    psi = random_state(d, 40 + d)
    r = gamma2_protocol(LevelScheme.default(d), TrapConfig(), "Z", psi)
    assert r.compare(1e-8).matches
    # the realized single-ion gate is a valid Z_d(psi)
    assert abs(abs((r.y_matrix @ psi)[-1]) - 1) < 1e-6
    assert r.leakage < 1e-10


def test_inputs_with_control_below_top_are_untouched():
    r = gamma2_protocol(LevelScheme.default(3), TrapConfig(), "X", 1.0)
    R = r.restricted
    assert np.allclose(R[:6, :6], np.eye(6) * R[0, 0], atol=1e-12)
    assert abs(abs(R[0, 0]) - 1) < 1e-12


def test_operator_unitary_and_matches_program():
    r = gamma2_protocol(LevelScheme.default(3), TrapConfig(), "X", 2.0)
    assert unitarity_deviation(r.operator) < 1e-10
    L = r.levels
    again = program_operator(loads_program(dumps_program(r.program)), L)
    assert np.allclose(again, r.operator, atol=1e-13)


def test_stage12_structure():
    r = gamma2_protocol(LevelScheme.default(3), TrapConfig(), "X", 1.0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b = random_state(3, rng), random_state(3, rng)
        s = stage12_state(r.program, a, b, r.levels)
        e = stage12_expected(3, r.levels, 3, a, b)
        assert abs(np.vdot(e, s)) ** 2 > 1 - 1e-9


def test_wrong_sideband_sign_fails():
    r = gamma2_protocol(LevelScheme.default(3), TrapConfig(), "X", 1.0, control_sign="-")
    assert not r.compare(1e-8).matches


def test_program_layout():
    r = gamma2_protocol(LevelScheme.default(3), TrapConfig(), "X", 1.0)
    segs = r.program.segments
    assert [s.interaction for s in segs] == ["U+", "V", "U-", "V", "U-", "V", "U+"]
    assert [s.ion for s in segs] == [0, 0, 1, 1, 1, 0, 0]
    assert segs[0].pairs() == ((0, 3), (1, 4))
    assert segs[2].pairs() == ((0, 3), (1, 4), (2, 5))
    assert segs[4] == segs[2].inverse()


def test_protocol_requirements():
    with pytest.raises(UnsupportedConfigurationError):
        gamma2_protocol(LevelScheme.default(3), TrapConfig(n_max=1), "X", 1.0)
    with pytest.raises(UnsupportedConfigurationError):
        gamma2_protocol(LevelScheme.default(3, shelf=False), TrapConfig(), "X", 1.0)


def test_unequal_lamb_dicke_parameters():
    r = gamma2_protocol(LevelScheme.default(3), TrapConfig(eta=(0.05, 0.08, 0.11)), "X", 1.0)
    assert r.compare(1e-8).matches


def test_computational_indices():
    assert list(computational_indices(2, 4, 2)) == [0, 3, 12, 15]
