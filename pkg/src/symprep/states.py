"""
Dense state vectors for N qubits (optionally tensored with one bosonic mode),
Dicke states and symmetric superpositions.

Basis convention, used by every module and file format:

* qubit 1 is the most significant bit, |g> = 0 and |e> = 1;
* with a bus mode present the Fock index is the least significant digit,
  i.e. ``index = qubit_index * boson_dim + n``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb, sqrt
from typing import Sequence

import numpy as np

MAX_QUBITS = 14
NORM_TOL = 1e-12


def _check_nk(N: int, k: int) -> None:
    if N < 0 or not 0 <= k <= N:
        raise ValueError(f"invalid Dicke label (N={N}, k={k}); need 0 <= k <= N")


def _check_size(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"{n_qubits} qubits exceeds the dense-vector limit MAX_QUBITS={MAX_QUBITS}")


def popcounts(n_qubits: int) -> np.ndarray:
    """Hamming weight of every computational basis index."""
    idx = np.arange(2**n_qubits)
    w = np.zeros(2**n_qubits, dtype=int)
    for q in range(n_qubits):
        w += (idx >> q) & 1
    return w


@dataclass(frozen=True)
class DickeLabel:
    N: int
    k: int

    def __post_init__(self):
        _check_nk(self.N, self.k)


@dataclass(frozen=True)
class SymmetricCoefficients:
    """Amplitudes c_k of sum_k c_k |D_{N,k}>, normalised on construction."""

    c: np.ndarray

    def __init__(self, c: Sequence[complex]):
        arr = np.asarray(c, dtype=complex).ravel().copy()
        if arr.size < 2:
            raise ValueError("need at least N+1 = 2 coefficients")
        norm = np.linalg.norm(arr)
        if norm == 0:
            raise ValueError("all-zero coefficient vector")
        arr /= norm
        arr.flags.writeable = False
        object.__setattr__(self, "c", arr)

    @property
    def N(self) -> int:
        return self.c.size - 1

    def __len__(self):
        return self.c.size

    def __getitem__(self, k):
        return self.c[k]

    def tolist(self) -> list[complex]:
        return [complex(x) for x in self.c]


@dataclass(frozen=True)
class StateVector:
    """Immutable amplitude vector over a qubit register plus optional bus mode."""

    amplitudes: np.ndarray
    n_qubits: int
    boson_dim: int = 0
    qubit_labels: tuple = field(default=())

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel().copy()
        _check_size(self.n_qubits)
        expected = 2**self.n_qubits * max(self.boson_dim, 1)
        if amps.size != expected:
            raise ValueError(f"expected {expected} amplitudes, got {amps.size}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        labels = tuple(self.qubit_labels) or tuple(range(1, self.n_qubits + 1))
        if len(labels) != self.n_qubits:
            raise ValueError("qubit_labels length does not match n_qubits")
        object.__setattr__(self, "qubit_labels", labels)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_qubits, self.boson_dim)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def with_amplitudes(self, amps) -> "StateVector":
        return StateVector(amps, self.n_qubits, self.boson_dim, self.qubit_labels)

    def qubit_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to (2**n_qubits, max(boson_dim, 1))."""
        return self.amplitudes.reshape(2**self.n_qubits, max(self.boson_dim, 1))

    def with_boson(self, boson_dim: int) -> "StateVector":
        """Tensor with the bus vacuum |0> (only from a bare qubit register)."""
        if self.boson_dim:
            raise ValueError("state already carries a boson mode")
        vac = np.zeros(boson_dim, dtype=complex)
        vac[0] = 1.0
        return StateVector(np.kron(self.amplitudes, vac), self.n_qubits, boson_dim, self.qubit_labels)

    def vacuum_component(self) -> "StateVector":
        """Unnormalised projection onto bus vacuum, as a bare qubit state."""
        if not self.boson_dim:
            return self
        return StateVector(self.qubit_matrix()[:, 0], self.n_qubits, 0, self.qubit_labels)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_qubits": self.n_qubits,
                "boson_dim": self.boson_dim,
                "re": [float(x) for x in self.amplitudes.real],
                "im": [float(x) for x in self.amplitudes.imag],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        d = json.loads(text)
        amps = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        return cls(amps, int(d["n_qubits"]), int(d.get("boson_dim", 0)))


def basis_state(bits: Sequence[int] | str, boson_dim: int = 0, fock: int = 0) -> StateVector:
    """Product state from a bit string like ``"ggee"`` or ``[0, 0, 1, 1]``."""
    if isinstance(bits, str):
        bits = [{"g": 0, "e": 1, "0": 0, "1": 1}[ch] for ch in bits]
    n = len(bits)
    _check_size(n)
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    amps = np.zeros(2**n * max(boson_dim, 1), dtype=complex)
    amps[idx * max(boson_dim, 1) + fock] = 1.0
    return StateVector(amps, n, boson_dim)


def ground_state(n_qubits: int, boson_dim: int = 0) -> StateVector:
    return basis_state([0] * n_qubits, boson_dim)


def dicke_norm(N: int, k: int) -> float:
    """Normalisation d_{N,k} = sqrt(binomial(N, k))."""
    _check_nk(N, k)
    return sqrt(comb(N, k))


def dicke_vector(N: int, k: int) -> np.ndarray:
    _check_nk(N, k)
    _check_size(N)
    v = (popcounts(N) == k).astype(complex)
    return v / dicke_norm(N, k)


def dicke_state(label: DickeLabel | tuple[int, int]) -> StateVector:
    if not isinstance(label, DickeLabel):
        label = DickeLabel(*label)
    return StateVector(dicke_vector(label.N, label.k), label.N)


def recursion_amplitudes(N: int, k: int) -> tuple[float, float]:
    """Branch amplitudes (a, b) in |D_{N,k}> = a |D_{N-1,k-1}>|e> + b |D_{N-1,k}>|g>.

    Edge cases k = 0 and k = N have one vanishing branch.
    """
    _check_nk(N, k)
    if N < 1:
        raise ValueError("recursion needs N >= 1")
    d = dicke_norm(N, k)
    a = dicke_norm(N - 1, k - 1) / d if k >= 1 else 0.0
    b = dicke_norm(N - 1, k) / d if k <= N - 1 else 0.0
    return a, b


def assemble_symmetric(c: SymmetricCoefficients | Sequence[complex]) -> StateVector:
    """Full 2**N vector of sum_k c_k |D_{N,k}>."""
    if not isinstance(c, SymmetricCoefficients):
        c = SymmetricCoefficients(c)
    N = c.N
    _check_size(N)
    w = popcounts(N)
    amps = np.array([c.c[k] for k in w], dtype=complex) / np.sqrt([comb(N, k) for k in w])
    return StateVector(amps, N)


def staircase_index(N: int, k: int) -> int:
    """Basis index of |(k)> = |g...g e...e> with the last k qubits excited."""
    _check_nk(N, k)
    return (1 << k) - 1


def staircase_basis_state(N: int, k: int) -> StateVector:
    _check_nk(N, k)
    return basis_state([0] * (N - k) + [1] * k)


def staircase_superposition(c: SymmetricCoefficients | Sequence[complex]) -> StateVector:
    """sum_k c_k |(k)>, the target of the encoding circuit."""
    if not isinstance(c, SymmetricCoefficients):
        c = SymmetricCoefficients(c)
    N = c.N
    amps = np.zeros(2**N, dtype=complex)
    for k in range(N + 1):
        amps[staircase_index(N, k)] = c.c[k]
    return StateVector(amps, N)


def fidelity(psi: StateVector, phi: StateVector) -> float:
    """|<psi|phi>|^2 for two states on identically shaped registers."""
    if psi.shape != phi.shape:
        raise ValueError(f"register mismatch: {psi.shape} vs {phi.shape}")
    return float(abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)


def dicke_coefficients(psi: StateVector) -> np.ndarray:
    """Overlaps <D_{N,k}|psi> for k = 0..N (qubit-only states)."""
    if psi.boson_dim:
        raise ValueError("expects a bare qubit register")
    N = psi.n_qubits
    return np.array([np.vdot(dicke_vector(N, k), psi.amplitudes) for k in range(N + 1)])


def permute_qubits(psi: StateVector, perm: Sequence[int]) -> StateVector:
    """Relabel qubits: output qubit i carries input qubit perm[i] (0-based)."""
    n = psi.n_qubits
    b = max(psi.boson_dim, 1)
    t = psi.amplitudes.reshape([2] * n + [b])
    t = np.transpose(t, list(perm) + [n])
    return psi.with_amplitudes(t.reshape(-1))


def kron_states(*states: StateVector) -> StateVector:
    """Tensor product of bare qubit registers in the given order."""
    amps = np.array([1.0 + 0j])
    n = 0
    for s in states:
        if s.boson_dim:
            raise ValueError("kron_states only joins bare qubit registers")
        amps = np.kron(amps, s.amplitudes)
        n += s.n_qubits
    return StateVector(amps, n)
