"""Independent reference implementations used by the tests.

Everything here is built from scratch with itertools / scipy.linalg.expm /
explicit Kronecker products, so agreement with the package is a real check.
"""
from __future__ import annotations

import itertools
from math import comb

import numpy as np
from scipy.linalg import expm

G = np.array([1, 0], dtype=complex)
E = np.array([0, 1], dtype=complex)
SM = np.outer(G, E)  # |g><e|
I2 = np.eye(2)


def kron_all(ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def product_state(bits: str) -> np.ndarray:
    return kron_all([(G if b == "g" else E).reshape(-1, 1) for b in bits]).ravel()


def dicke_bruteforce(N: int, k: int) -> np.ndarray:
    """Sum over all distinct arrangements of k excitations, normalised."""
    v = np.zeros(2**N, dtype=complex)
    for pos in itertools.combinations(range(N), k):
        bits = "".join("e" if q in pos else "g" for q in range(N))
        v += product_state(bits)
    return v / np.linalg.norm(v)


def symmetric_bruteforce(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    c = c / np.linalg.norm(c)
    N = c.size - 1
    return sum(c[k] * dicke_bruteforce(N, k) for k in range(N + 1))


def staircase_bruteforce(c) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    c = c / np.linalg.norm(c)
    N = c.size - 1
    return sum(c[k] * product_state("g" * (N - k) + "e" * k) for k in range(N + 1))


def single(N: int, q: int, op: np.ndarray) -> np.ndarray:
    """op on qubit q (1-based) of N."""
    return kron_all([op if i == q else I2 for i in range(1, N + 1)])


def controlled(N: int, control: int, target: int, U: np.ndarray) -> np.ndarray:
    """|e><e|_control (x) U_target + |g><g|_control (x) 1."""
    Pe, Pg = np.outer(E, E), np.outer(G, G)
    a = kron_all([Pe if i == control else (U if i == target else I2) for i in range(1, N + 1)])
    b = kron_all([Pg if i == control else I2 for i in range(1, N + 1)])
    return a + b


def lowering(N: int, q: int) -> np.ndarray:
    return single(N, q, SM)


def exchange_dense(n: int) -> np.ndarray:
    X = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                X += lowering(n, i) @ lowering(n, j).conj().T
    return X


def delta2_quadratic(delta: float, g2: float, delta1: float, g1: float = 1.0) -> float:
    """Root near delta1 of D2^2 - (D1 + lam1 - delta) D2 + g2^2 = 0."""
    b = delta1 + abs(g1) ** 2 / delta1 - delta
    return float((b + np.sqrt(b * b - 4 * abs(g2) ** 2)) / 2)


def expm_propagate(H: np.ndarray, psi: np.ndarray, t: float) -> np.ndarray:
    return expm(-1j * H * t) @ psi


def mobius_dense(c, A) -> np.ndarray:
    """Dicke coefficients of A^{(x)N} applied to the symmetric state, normalised."""
    c = np.asarray(c, dtype=complex)
    N = c.size - 1
    psi = kron_all([A] * N) @ symmetric_bruteforce(c)
    psi /= np.linalg.norm(psi)
    return np.array([np.vdot(dicke_bruteforce(N, k), psi) for k in range(N + 1)])


def majorana_bruteforce(c) -> np.ndarray:
    """Coefficients a_k = <g..g e..e-ish| overlaps: p(z) = (<g| + z<e|)^N |psi>."""
    psi = symmetric_bruteforce(c)
    N = len(c) - 1
    a = np.zeros(N + 1, dtype=complex)
    for idx in range(2**N):
        a[bin(idx).count("1")] += psi[idx]
    return a


def fock_pulse_dense(kind: str, theta: float, phi: float, D: int) -> np.ndarray:
    """Carrier or red sideband on ancilla (x) mode via scipy expm."""
    a = np.diag(np.sqrt(np.arange(1, D)), 1)
    sp = np.outer(E, G)
    X = np.kron(sp, np.eye(D)) if kind == "carrier" else np.kron(sp, a)
    X = np.exp(1j * phi) * X
    return expm(-1j * 0.5 * theta * (X + X.conj().T))


def binom_weights(N: int) -> np.ndarray:
    return np.sqrt([comb(N, k) for k in range(N + 1)])


def random_coefficients(rng, N: int) -> np.ndarray:
    c = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
    return c / np.linalg.norm(c)
