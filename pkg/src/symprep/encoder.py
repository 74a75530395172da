"""
Staircase encoding: one rotation plus a chain of controlled rotations that
turns |g...g> into sum_k c_k |(k)>, where |(k)> has its last k qubits excited.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import StateVector, SymmetricCoefficients, ground_state

ZERO_TAIL = 1e-15


@dataclass(frozen=True)
class RotationPair:
    """|g> -> alpha|g> + beta|e>; completed to a unitary by |e> -> -beta*|g> + alpha*|e>."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        n = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {n!r}, expected 1")

    @classmethod
    def identity(cls) -> "RotationPair":
        return cls(1.0 + 0j, 0j)

    def matrix(self) -> np.ndarray:
        a, b = complex(self.alpha), complex(self.beta)
        return np.array([[a, -b.conjugate()], [b, a.conjugate()]], dtype=complex)


@dataclass(frozen=True)
class Rotation:
    target: int
    pair: RotationPair
    control = None


@dataclass(frozen=True)
class ControlledRotation:
    control: int
    target: int
    pair: RotationPair


@dataclass(frozen=True)
class EncodingCircuit:
    n_qubits: int
    gates: tuple

    def __len__(self):
        return len(self.gates)

    def to_json(self) -> str:
        out = []
        for gate in self.gates:
            a, b = complex(gate.pair.alpha), complex(gate.pair.beta)
            out.append(
                {
                    "kind": "crot" if isinstance(gate, ControlledRotation) else "rot",
                    "control": gate.control,
                    "target": gate.target,
                    "alpha": [a.real, a.imag],
                    "beta": [b.real, b.imag],
                }
            )
        return json.dumps(out)

    @classmethod
    def from_json(cls, text: str, n_qubits: int) -> "EncodingCircuit":
        gates = []
        for g in json.loads(text):
            pair = RotationPair(complex(*g["alpha"]), complex(*g["beta"]))
            if g["kind"] == "rot":
                gates.append(Rotation(int(g["target"]), pair))
            elif g["kind"] == "crot":
                gates.append(ControlledRotation(int(g["control"]), int(g["target"]), pair))
            else:
                raise ValueError(f"unknown gate kind {g['kind']!r}")
        return cls(n_qubits, tuple(gates))


def staircase_decompose(c: SymmetricCoefficients | Sequence[complex]) -> list[RotationPair]:
    """Rotation pairs (alpha_m, beta_m), m = 0..N-1, such that
    beta_0 ... beta_{m-1} alpha_m = c_m and beta_0 ... beta_{N-1} = c_N.

    Phases sit on alpha_m and on the final beta; the other betas are real
    positive tail-norm ratios.  A vanishing tail ends the chain with
    identity pairs.
    """
    if not isinstance(c, SymmetricCoefficients):
        c = SymmetricCoefficients(c)
    cc = c.c
    N = c.N
    tail = np.sqrt(np.cumsum(np.abs(cc[::-1]) ** 2)[::-1])  # tail[m] = sqrt(sum_{k>=m} |c_k|^2)
    pairs: list[RotationPair] = []
    for m in range(N):
        if tail[m] < ZERO_TAIL:
            pairs.append(RotationPair.identity())
            continue
        alpha = cc[m] / tail[m]
        if m == N - 1:
            beta = cc[N] / tail[m]
        else:
            beta = tail[m + 1] / tail[m] + 0j
        # renormalise away rounding so the pair invariant holds to 1e-12
        s = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        pairs.append(RotationPair(complex(alpha / s), complex(beta / s)))
    return pairs


def build_circuit(pairs: Sequence[RotationPair], N: int) -> EncodingCircuit:
    """Pair m drives qubit N-m; every pair after the first is controlled by qubit N-m+1."""
    if len(pairs) > N:
        raise ValueError(f"{len(pairs)} rotation pairs do not fit on {N} qubits")
    gates = []
    for m, pair in enumerate(pairs):
        target = N - m
        if m == 0:
            gates.append(Rotation(target, pair))
        else:
            gates.append(ControlledRotation(target + 1, target, pair))
    return EncodingCircuit(N, tuple(gates))


def _apply_1q(amps: np.ndarray, n: int, target: int, U: np.ndarray, control: int | None, bdim: int) -> np.ndarray:
    t = amps.reshape([2] * n + [bdim])
    q = target - 1
    if control is None:
        t = np.moveaxis(np.tensordot(U, t, axes=([1], [q])), 0, q)
        return t.reshape(-1)
    c = control - 1
    t = t.copy()
    sl = [slice(None)] * (n + 1)
    sl[c] = 1
    sub = t[tuple(sl)]  # control axis removed
    qq = q if q < c else q - 1
    sub = np.moveaxis(np.tensordot(U, sub, axes=([1], [qq])), 0, qq)
    t[tuple(sl)] = sub
    return t.reshape(-1)


def apply_circuit(circuit: EncodingCircuit, psi0: StateVector | None = None) -> StateVector:
    if psi0 is None:
        psi0 = ground_state(circuit.n_qubits)
    if psi0.n_qubits != circuit.n_qubits:
        raise ValueError(f"circuit acts on {circuit.n_qubits} qubits, state has {psi0.n_qubits}")
    amps = psi0.amplitudes
    bdim = max(psi0.boson_dim, 1)
    for gate in circuit.gates:
        amps = _apply_1q(amps, circuit.n_qubits, gate.target, gate.pair.matrix(), gate.control, bdim)
    return psi0.with_amplitudes(amps)


def encode(c: SymmetricCoefficients | Sequence[complex]) -> StateVector:
    """Staircase superposition sum_k c_k |(k)> produced by the compiled circuit."""
    if not isinstance(c, SymmetricCoefficients):
        c = SymmetricCoefficients(c)
    return apply_circuit(build_circuit(staircase_decompose(c), c.N))
