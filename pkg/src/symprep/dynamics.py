"""
Dispersive red-sideband dynamics of an addressed qubit ensemble plus one
extra qubit, in the effective (bus eliminated) picture and with an explicit
truncated bus mode.

Units: hbar = 1, rates in units of the collective Rabi frequency g1, times in
units of 1/g1.

Effective model, lab frame::

    H(t) = lam1 sum_{i != j in ens} s_i s_j^+
           + sum_{i in ens} (beta s_i s^+ exp(-i delta t) + h.c.)

Rotating frame (psi_lab = exp(-i delta t n_x) psi_rot, n_x = s^+ s of the
extra qubit)::

    H_rot = lam1 sum_{i != j} s_i s_j^+ + (beta sum_i s_i s^+ + h.c.) - delta n_x

Full bus model (interaction picture of qubits and mode)::

    H_full(t) = sum_{i in ens} (g1 s_i^+ a exp(+i D1 t) + h.c.)
                + (g2 s^+ a exp(+i D2 t) + h.c.)

The sign of the exponent is fixed so that eliminating the bus to second
order (mode in vacuum) gives lam1 J+J- + lam2 n_x + (beta J- s^+ e^{-i(D1-D2)t}
+ h.c.), which after removing the linear Stark terms lam1 n_ens + lam2 n_x is
exactly the effective model with delta = D1 - D2 - lam2 + lam1.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .states import StateVector, popcounts

DISPERSIVE_RATIO = 10.0
HERMITIAN_TOL = 1e-12


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DriveConfig:
    g1: complex = 1.0
    g2: complex = 0.1
    delta1: float = 20.0
    delta2: float = 20.0

    def __post_init__(self):
        if self.delta1 == 0 or self.delta2 == 0:
            raise ValueError("detunings must be nonzero")
        for g, d, name in ((self.g1, self.delta1, "1"), (self.g2, self.delta2, "2")):
            if g != 0 and abs(d) / abs(g) < DISPERSIVE_RATIO:
                warnings.warn(
                    f"|delta{name}/g{name}| = {abs(d) / abs(g):.3g} < {DISPERSIVE_RATIO}: "
                    "outside the dispersive regime",
                    stacklevel=3,
                )


@dataclass(frozen=True)
class DerivedParams:
    lambda1: float
    lambda2: float
    beta: complex
    delta: float
    dbar: float

    @property
    def selectivity(self) -> float:
        """lambda1 / |beta|; selective addressing needs this >> 1."""
        return abs(self.lambda1) / abs(self.beta) if self.beta != 0 else np.inf


def derive_params(cfg: DriveConfig) -> DerivedParams:
    if cfg.delta1 == 0 or cfg.delta2 == 0:
        raise ValueError("detunings must be nonzero")
    lam1 = abs(cfg.g1) ** 2 / cfg.delta1
    lam2 = abs(cfg.g2) ** 2 / cfg.delta2
    inv_dbar = 0.5 * (1.0 / cfg.delta1 + 1.0 / cfg.delta2)
    if inv_dbar == 0:
        raise ValueError("harmonic-mean detuning is infinite (delta1 = -delta2)")
    dbar = 1.0 / inv_dbar
    beta = complex(np.conj(cfg.g1) * cfg.g2 / dbar)
    delta = cfg.delta1 - cfg.delta2 - lam2 + lam1
    return DerivedParams(float(lam1), float(lam2), beta, float(delta), float(dbar))


def solve_delta2(delta_target: float, g2: complex, delta1: float, g1: complex = 1.0,
                 tol: float = 1e-13, max_iter: int = 200) -> float:
    """Second detuning that realises a given delta, by fixed-point iteration
    on D2 = D1 + lam1 - |g2|^2/D2 - delta."""
    lam1 = abs(g1) ** 2 / delta1
    d2 = delta1 + lam1 - delta_target
    for _ in range(max_iter):
        if d2 == 0:
            break
        new = delta1 + lam1 - abs(g2) ** 2 / d2 - delta_target
        if abs(new - d2) <= tol * max(1.0, abs(new)):
            return float(new)
        d2 = new
    raise PropagationError(f"delta2 fixed point did not converge for delta={delta_target!r}")


@dataclass(frozen=True)
class AddressingSpec:
    """Qubit roles, 1-based: a globally driven ensemble, one extra qubit, idle spectators."""

    ensemble: tuple
    extra: int
    spectators: tuple = field(default=())

    def __post_init__(self):
        ens = tuple(int(q) for q in self.ensemble)
        spec = tuple(int(q) for q in self.spectators)
        object.__setattr__(self, "ensemble", ens)
        object.__setattr__(self, "spectators", spec)
        if not ens:
            raise ValueError("ensemble must contain at least one qubit")
        everything = ens + (self.extra,) + spec
        if len(set(everything)) != len(everything):
            raise ValueError("ensemble, extra and spectators must be disjoint")
        if sorted(everything) != list(range(1, len(everything) + 1)):
            raise ValueError("qubit roles must cover 1..N exactly")

    @property
    def n(self) -> int:
        return len(self.ensemble)

    @property
    def n_qubits(self) -> int:
        return self.n + 1 + len(self.spectators)

    @classmethod
    def stage(cls, n: int, N: int) -> "AddressingSpec":
        """Ensemble = qubits 1..n, extra = qubit n+1, the rest idle."""
        if not 1 <= n < N:
            raise ValueError(f"stage n={n} invalid for N={N}")
        return cls(tuple(range(1, n + 1)), n + 1, tuple(range(n + 2, N + 1)))


def exchange_eigenvalue(n: int, k: int) -> int:
    """Eigenvalue k(n-k) of sum_{i != j} s_i s_j^+ on |D_{n,k}>."""
    if n < 0 or not 0 <= k <= n:
        raise ValueError(f"invalid (n={n}, k={k})")
    return k * (n - k)


# ---------------------------------------------------------------- operators

_SM = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e| with g=0, e=1


def sigma_minus(n_qubits: int, q: int, boson_dim: int = 0) -> np.ndarray:
    """Lowering operator of qubit q (1-based) on the full register."""
    left = np.eye(2 ** (q - 1))
    right = np.eye(2 ** (n_qubits - q) * max(boson_dim, 1))
    return np.kron(np.kron(left, _SM), right)


def annihilation(n_qubits: int, boson_dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, boson_dim)), 1).astype(complex)
    return np.kron(np.eye(2**n_qubits), a)


def number_diagonal(n_qubits: int, qubits: Sequence[int], boson_dim: int = 0) -> np.ndarray:
    """Diagonal of sum_{q in qubits} s_q^+ s_q."""
    idx = np.arange(2**n_qubits)
    w = np.zeros(2**n_qubits)
    for q in qubits:
        w += (idx >> (n_qubits - q)) & 1
    return np.repeat(w, max(boson_dim, 1))


def excitation_diagonal(n_qubits: int, boson_dim: int = 0) -> np.ndarray:
    """Diagonal of total excitation number: excited qubits plus bus quanta."""
    w = np.repeat(popcounts(n_qubits).astype(float), max(boson_dim, 1))
    if boson_dim:
        w = w + np.tile(np.arange(boson_dim, dtype=float), 2**n_qubits)
    return w


def exchange_operator(spec: AddressingSpec, boson_dim: int = 0) -> np.ndarray:
    n_q = spec.n_qubits
    lows = [sigma_minus(n_q, q, boson_dim) for q in spec.ensemble]
    X = np.zeros_like(lows[0])
    for i, si in enumerate(lows):
        for j, sj in enumerate(lows):
            if i != j:
                X += si @ sj.conj().T
    return X


def _collective_hop(spec: AddressingSpec) -> np.ndarray:
    """sum_{i in ens} s_i s^+ : moves one excitation from the ensemble to the extra qubit."""
    n_q = spec.n_qubits
    sx_up = sigma_minus(n_q, spec.extra).conj().T
    return sum(sigma_minus(n_q, q) for q in spec.ensemble) @ sx_up


def build_effective_rotating(spec: AddressingSpec, p: DerivedParams) -> np.ndarray:
    X = exchange_operator(spec)
    hop = p.beta * _collective_hop(spec)
    nx = np.diag(number_diagonal(spec.n_qubits, [spec.extra])).astype(complex)
    return p.lambda1 * X + hop + hop.conj().T - p.delta * nx


def build_effective_lab(spec: AddressingSpec, p: DerivedParams) -> Callable[[float], np.ndarray]:
    X = p.lambda1 * exchange_operator(spec)
    hop = p.beta * _collective_hop(spec)
    hop_dag = hop.conj().T

    def H(t: float) -> np.ndarray:
        ph = np.exp(-1j * p.delta * t)
        return X + hop * ph + hop_dag * np.conj(ph)

    return H


def effective_diagonal(spec: AddressingSpec, p: DerivedParams) -> np.ndarray:
    """Coupling-free part of the rotating-frame Hamiltonian (exchange + delta term)."""
    nx = np.diag(number_diagonal(spec.n_qubits, [spec.extra])).astype(complex)
    return p.lambda1 * exchange_operator(spec) - p.delta * nx


def rotating_to_lab(psi: StateVector, spec: AddressingSpec, delta: float, t: float) -> StateVector:
    """psi_lab = exp(-i delta t n_x) psi_rot."""
    nx = number_diagonal(psi.n_qubits, [spec.extra], psi.boson_dim)
    return psi.with_amplitudes(np.exp(-1j * delta * t * nx) * psi.amplitudes)


def _check_truncation(boson_truncation: int) -> None:
    if boson_truncation < 2:
        raise ValueError("boson truncation must be >= 2")


def build_full_bus(spec: AddressingSpec, cfg: DriveConfig, boson_truncation: int) -> Callable[[float], np.ndarray]:
    """Time-dependent qubits + bus Hamiltonian (see module docstring for the convention)."""
    _check_truncation(boson_truncation)
    n_q = spec.n_qubits
    a = annihilation(n_q, boson_truncation)
    h1 = cfg.g1 * sum(sigma_minus(n_q, q, boson_truncation).conj().T for q in spec.ensemble) @ a
    h2 = cfg.g2 * sigma_minus(n_q, spec.extra, boson_truncation).conj().T @ a

    def H(t: float) -> np.ndarray:
        m1 = h1 * np.exp(1j * cfg.delta1 * t)
        m2 = h2 * np.exp(1j * cfg.delta2 * t)
        return m1 + m1.conj().T + m2 + m2.conj().T

    return H


def full_bus_static(spec: AddressingSpec, cfg: DriveConfig, boson_truncation: int) -> tuple[np.ndarray, np.ndarray]:
    """Time-independent form of :func:`build_full_bus`.

    Returns ``(H_static, F)`` with ``F`` the diagonal frame generator
    delta1 n_ens + delta2 n_x, such that
    psi_full(t) = exp(+i F t) exp(-i H_static t) psi_full(0).
    """
    _check_truncation(boson_truncation)
    n_q = spec.n_qubits
    a = annihilation(n_q, boson_truncation)
    h = cfg.g1 * sum(sigma_minus(n_q, q, boson_truncation).conj().T for q in spec.ensemble) @ a
    h = h + cfg.g2 * sigma_minus(n_q, spec.extra, boson_truncation).conj().T @ a
    F = cfg.delta1 * number_diagonal(n_q, spec.ensemble, boson_truncation)
    F = F + cfg.delta2 * number_diagonal(n_q, [spec.extra], boson_truncation)
    return h + h.conj().T + np.diag(F), F


# --------------------------------------------------------------- propagation

def check_hermitian(H: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    if np.max(np.abs(H - H.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise ValueError("Hamiltonian is not Hermitian")


def _as_array(psi0) -> tuple[np.ndarray, Callable]:
    if isinstance(psi0, StateVector):
        return psi0.amplitudes, psi0.with_amplitudes
    arr = np.asarray(psi0, dtype=complex)
    return arr, lambda a: a


def _expm_hermitian(M: np.ndarray) -> np.ndarray:
    """exp(-i M) for Hermitian M, unitary to machine precision."""
    w, V = np.linalg.eigh(M)
    return (V * np.exp(-1j * w)) @ V.conj().T


def _magnus4_step(H: Callable, t0: float, h: float) -> np.ndarray:
    c = np.sqrt(3.0) / 6.0
    H1 = H(t0 + (0.5 - c) * h)
    H2 = H(t0 + (0.5 + c) * h)
    M = 0.5 * h * (H1 + H2) - 1j * (np.sqrt(3.0) / 12.0) * h**2 * (H2 @ H1 - H1 @ H2)
    return _expm_hermitian(0.5 * (M + M.conj().T))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, dim)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def populations(self, projector_vectors: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """|<v|psi(t)>|^2 per named vector, or <psi|P|psi> for named matrices."""
        out = {}
        for name, v in projector_vectors.items():
            if v.ndim == 1:
                out[name] = np.abs(self.states @ v.conj()) ** 2
            else:
                out[name] = np.real(np.einsum("ti,ij,tj->t", self.states.conj(), v, self.states))
        return out


def propagate_trajectory(H, psi0, t: float, dt: float | None = None, n_samples: int = 101) -> Trajectory:
    """Integrate i dpsi/dt = H psi and sample the state at uniform times.

    A constant (array) ``H`` is propagated exactly through its eigenbasis;
    a callable ``H(t)`` is stepped with the fourth-order Magnus integrator
    at a step no longer than ``dt`` (required), chosen so that the samples
    fall exactly on the uniform grid.
    """
    if t < 0:
        raise ValueError("duration must be non-negative")
    amps, _ = _as_array(psi0)
    n_samples = max(int(n_samples), 2)
    if callable(H):
        check_hermitian(H(0.0))
        if dt is None or dt <= 0:
            raise ValueError("time-dependent propagation needs a positive dt")
        # step count rounded up to a multiple of the sample intervals, so
        # samples fall exactly on the uniform grid
        per = max(1, int(np.ceil(t / dt / (n_samples - 1) - 1e-12)))
        n_steps = per * (n_samples - 1)
        h = t / n_steps
        times, states = [0.0], [amps.copy()]
        psi = amps.copy()
        for s in range(n_steps):
            psi = _magnus4_step(H, s * h, h) @ psi
            if (s + 1) % per == 0:
                times.append((s + 1) * h)
                states.append(psi.copy())
        return Trajectory(np.linspace(0.0, t, n_samples), np.array(states))
    H = np.asarray(H)
    check_hermitian(H)
    w, V = np.linalg.eigh(H)
    times = np.linspace(0.0, t, n_samples)
    coeff = V.conj().T @ amps
    states = (np.exp(-1j * np.outer(times, w)) * coeff) @ V.T
    return Trajectory(times, states)


def propagate(H, psi0, t: float, dt: float | None = None):
    """Final state of i dpsi/dt = H psi after time ``t``; same type as ``psi0``.

    See :func:`propagate_trajectory` for the integrators used.
    """
    if t < 0:
        raise ValueError("duration must be non-negative")
    amps, wrap = _as_array(psi0)
    if callable(H):
        check_hermitian(H(0.0))
        if dt is None or dt <= 0:
            raise ValueError("time-dependent propagation needs a positive dt")
        n_steps = max(1, int(np.ceil(t / dt - 1e-12)))
        h = t / n_steps
        psi = amps.copy()
        for s in range(n_steps):
            psi = _magnus4_step(H, s * h, h) @ psi
    else:
        H = np.asarray(H)
        check_hermitian(H)
        psi = _expm_hermitian(H * t) @ amps
    if not np.all(np.isfinite(psi)):
        raise PropagationError("non-finite amplitudes after propagation")
    return wrap(psi)


def write_trajectory_csv(path, times: np.ndarray, columns: dict[str, np.ndarray]) -> None:
    """CSV with header ``t, <name>, ...`` and one row per sample time."""
    names = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *names])
        for i, t in enumerate(times):
            w.writerow([f"{t:.12g}", *(f"{float(columns[n][i]):.12g}" for n in names)])
