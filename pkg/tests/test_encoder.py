from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symprep.encoder import (
    ControlledRotation,
    EncodingCircuit,
    Rotation,
    RotationPair,
    apply_circuit,
    build_circuit,
    encode,
    staircase_decompose,
)
from symprep.states import ground_state, staircase_index

import oracles

REF = np.arange(1, 6) / sqrt(55)


def dense_circuit(circuit: EncodingCircuit) -> np.ndarray:
    N = circuit.n_qubits
    U = np.eye(2**N, dtype=complex)
    for g in circuit.gates:
        M = g.pair.matrix()
        if g.control is None:
            U = oracles.single(N, g.target, M) @ U
        else:
            U = oracles.controlled(N, g.control, g.target, M) @ U
    return U


def staircase_products(pairs):
    """c_m = beta_0 ... beta_{m-1} alpha_m and c_N = beta_0 ... beta_{N-1}."""
    out, acc = [], 1.0 + 0j
    for p in pairs:
        out.append(acc * p.alpha)
        acc *= p.beta
    out.append(acc)
    return np.array(out)


def test_rotation_pair_invariant():
    with pytest.raises(ValueError):
        RotationPair(1.0, 0.1)
    M = RotationPair(0.6, 0.8j).matrix()
    np.testing.assert_allclose(M.conj().T @ M, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(M @ [1, 0], [0.6, 0.8j])


def test_decompose_ground():
    pairs = staircase_decompose([1, 0, 0, 0, 0])
    assert pairs[0] == RotationPair(1, 0)
    assert all(p == RotationPair.identity() for p in pairs[1:])
    assert len(pairs) == 4


def test_decompose_reference():
    pairs = staircase_decompose(REF)
    assert pairs[0].alpha == pytest.approx(1 / sqrt(55), abs=1e-15)
    assert pairs[0].beta == pytest.approx(sqrt(54 / 55), abs=1e-15)
    assert abs(pairs[0].beta) == pytest.approx(0.99087, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_decompose_products(N, seed):
    c = oracles.random_coefficients(np.random.default_rng(seed), N)
    pairs = staircase_decompose(c)
    np.testing.assert_allclose(staircase_products(pairs), c, atol=1e-12)
    for p in pairs[:-1]:
        assert abs(p.beta.imag) < 1e-15 and p.beta.real >= 0


def test_decompose_zero_tail():
    c = [0.6, 0.8, 0, 0]
    pairs = staircase_decompose(c)
    np.testing.assert_allclose(staircase_products(pairs), c, atol=1e-15)
    assert pairs[2] == RotationPair.identity()


def test_build_circuit_layout():
    circ = build_circuit(staircase_decompose(REF), 4)
    assert isinstance(circ.gates[0], Rotation) and circ.gates[0].target == 4
    assert [(g.control, g.target) for g in circ.gates[1:]] == [(4, 3), (3, 2), (2, 1)]
    assert len(circ) == 4
    one = build_circuit([RotationPair(0.6, 0.8)], 1)
    assert len(one) == 1 and one.gates[0].target == 1
    early = build_circuit([RotationPair(0.6, 0.8)], 4)
    assert len(early) == 1 and early.gates[0].target == 4
    with pytest.raises(ValueError):
        build_circuit([RotationPair.identity()] * 3, 2)


def test_apply_examples():
    c = build_circuit(staircase_decompose([1, 0, 0, 0, 0]), 4)
    np.testing.assert_allclose(apply_circuit(c).amplitudes, ground_state(4).amplitudes)
    out = encode(REF).amplitudes
    for k in range(5):
        assert out[staircase_index(4, k)] == pytest.approx(REF[k], abs=1e-15)
    top = encode([0, 0, 0, 0, 1]).amplitudes
    assert abs(top[-1]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        apply_circuit(c, ground_state(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_apply_matches_dense_unitary(N, seed):
    c = oracles.random_coefficients(np.random.default_rng(seed), N)
    circ = build_circuit(staircase_decompose(c), N)
    psi0 = np.zeros(2**N, dtype=complex)
    psi0[0] = 1
    np.testing.assert_allclose(apply_circuit(circ).amplitudes, dense_circuit(circ) @ psi0, atol=1e-13)
    np.testing.assert_allclose(apply_circuit(circ).amplitudes, oracles.staircase_bruteforce(c), atol=1e-12)


def test_round_trip_and_support_200():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        N = int(rng.integers(2, 9))
        c = oracles.random_coefficients(rng, N)
        out = encode(c).amplitudes
        want = oracles.staircase_bruteforce(c)
        assert abs(np.vdot(want, out)) ** 2 >= 1 - 1e-12
        mask = np.ones(2**N, bool)
        mask[[staircase_index(N, k) for k in range(N + 1)]] = False
        assert np.max(np.abs(out[mask]), initial=0) < 1e-12


def test_apply_with_boson_mode():
    c = oracles.random_coefficients(np.random.default_rng(3), 3)
    circ = build_circuit(staircase_decompose(c), 3)
    out = apply_circuit(circ, ground_state(3).with_boson(3))
    np.testing.assert_allclose(out.vacuum_component().amplitudes, oracles.staircase_bruteforce(c), atol=1e-13)


def test_circuit_json_round_trip():
    circ = build_circuit(staircase_decompose([0.5, 0.5j, 0.5, -0.5]), 3)
    back = EncodingCircuit.from_json(circ.to_json(), 3)
    assert back == circ
    assert isinstance(back.gates[1], ControlledRotation)
