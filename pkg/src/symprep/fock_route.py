"""
Two-stage route to symmetric superpositions through the bus mode.

1. An ancilla qubit and the mode are driven by alternating carrier and
   red-sideband pulses (Law-Eberly synthesis) until the mode holds
   sum_k c_k |k> and the ancilla is back in |g>.
2. A chirped collective red-sideband passage on the N register qubits maps
   every Fock sector |k>|g...g> onto |D_{N,k}>|0>.

The passage Hamiltonian is

    H(t) = Delta(t) sum_q s_q^+ s_q + Omega(t) (a J_+ + a^dag J_-),

with a linear sweep Delta(t): -Delta_max -> +Delta_max and a raised-cosine
envelope Omega(t) = g sin^2(pi t / T).  |k>|g...g> is the highest eigenstate
of its excitation sector at t = 0 and |D_{N,k}>|0> is the highest at t = T, so
the register follows the top adiabatic state.  H conserves qubit excitations
plus mode quanta and is permutation symmetric, so each sector k reduces
exactly to the k+1 states |D_{N,j}>|k-j>; :func:`adiabatic_map` integrates
those small blocks and :func:`adiabatic_map_dense` the full register (for
cross-checks on small N).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import dynamics as dyn
from .states import (
    StateVector,
    SymmetricCoefficients,
    assemble_symmetric,
    dicke_vector,
)

SKIP_TOL = 1e-14
DEFAULT_DURATION = 40.0  # in units of 1/g
DEFAULT_SPAN = 5.0  # Delta_max = span * g * sqrt(N)
DEFAULT_DT = 0.01  # in units of 1/g


# ------------------------------------------------------------ pulse synthesis


@dataclass(frozen=True)
class Carrier:
    """exp(-i theta/2 (e^{i phi} s^+ + e^{-i phi} s^-)) on the ancilla."""

    theta: float
    phi: float
    kind = "carrier"


@dataclass(frozen=True)
class RedSideband:
    """exp(-i theta/2 (e^{i phi} s^+ a + e^{-i phi} s^- a^dag)); |g,n> <-> |e,n-1> at angle theta sqrt(n)."""

    theta: float
    phi: float
    kind = "sideband"


@dataclass(frozen=True)
class PulseSequence:
    """Forward pulse list taking |g>|0> to exp(-i global_phase) sum_k c_k |g>|k>."""

    pulses: tuple = ()
    global_phase: float = 0.0

    def __len__(self):
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def to_json(self) -> str:
        """Plain pulse list; the global phase is not stored."""
        return json.dumps([{"kind": p.kind, "theta": float(p.theta), "phi": float(p.phi)} for p in self.pulses])

    @classmethod
    def from_json(cls, text: str) -> "PulseSequence":
        pulses = []
        for d in json.loads(text):
            if d["kind"] == "carrier":
                pulses.append(Carrier(float(d["theta"]), float(d["phi"])))
            elif d["kind"] == "sideband":
                pulses.append(RedSideband(float(d["theta"]), float(d["phi"])))
            else:
                raise ValueError(f"unknown pulse kind {d['kind']!r}")
        return cls(tuple(pulses))


def _wrap(phi: float) -> float:
    return float((phi + np.pi) % (2 * np.pi) - np.pi)


def pulse_unitary(pulse, boson_dim: int) -> np.ndarray:
    """Unitary of one pulse on ancilla (most significant) x mode."""
    sp = dyn.sigma_minus(1, 1, boson_dim).conj().T
    if isinstance(pulse, Carrier):
        X = np.exp(1j * pulse.phi) * sp
    elif isinstance(pulse, RedSideband):
        X = np.exp(1j * pulse.phi) * sp @ dyn.annihilation(1, boson_dim)
    else:
        raise TypeError(f"not a pulse: {pulse!r}")
    return dyn._expm_hermitian(0.5 * pulse.theta * (X + X.conj().T))


def apply_sequence(seq: PulseSequence, boson_dim: int, psi0: StateVector | None = None) -> StateVector:
    """Apply the pulses in order (default start |g>|0>); the global phase is not applied."""
    if psi0 is None:
        amps = np.zeros(2 * boson_dim, dtype=complex)
        amps[0] = 1.0
    else:
        amps = psi0.amplitudes
    for p in seq:
        amps = pulse_unitary(p, boson_dim) @ amps
    return StateVector(amps, 1, boson_dim)


def _zeroing_angle(keep: complex, drop: complex) -> tuple[float, float]:
    """(x, phi) with cos x drop - i e^{-i phi} sin x keep = 0 (x in [0, pi/2])."""
    x = float(np.arctan2(abs(drop), abs(keep)))
    phi = np.pi / 2 - np.angle(drop) + np.angle(keep)
    return x, _wrap(phi)


def law_eberly_synthesize(c: SymmetricCoefficients | Sequence[complex]) -> PulseSequence:
    """Pulse sequence preparing sum_k c_k |k> in the mode, ancilla ending in |g>.

    Works backwards from the target: for n = N..1 a sideband pulse empties
    |g,n> into |e,n-1>, then a carrier pulse empties |e,n-1> into |g,n-1>.
    The forward sequence applies the inverse pulses in reverse order; pulses
    with zero angle are dropped.  At most 2N pulses result.
    """
    if not isinstance(c, SymmetricCoefficients):
        c = SymmetricCoefficients(c)
    N = c.N
    D = N + 2
    psi = np.zeros((2, D), dtype=complex)  # [ancilla, fock]
    psi[0, : N + 1] = c.c
    backward = []
    for n in range(N, 0, -1):
        # sideband: basis (|g,n>, |e,n-1>), rotation angle theta sqrt(n)
        ag, ae = psi[0, n], psi[1, n - 1]
        if abs(ag) > SKIP_TOL:
            x, phi = _zeroing_angle(keep=ae, drop=ag)
            # the zeroing pulse moves |g,n> into |e,n-1>: phases of the
            # rotation with H_{g,e} = e^{-i phi} sqrt(n)
            p = RedSideband(2 * x / np.sqrt(n), phi)
            psi = (pulse_unitary(p, D) @ psi.reshape(-1)).reshape(2, D)
            backward.append(p)
        ag, ae = psi[0, n - 1], psi[1, n - 1]
        if abs(ae) > SKIP_TOL:
            x, phi = _zeroing_angle(keep=ag, drop=ae)
            p = Carrier(2 * x, _wrap(-phi))
            psi = (pulse_unitary(p, D) @ psi.reshape(-1)).reshape(2, D)
            backward.append(p)
    residual = psi.reshape(-1).copy()
    gamma = float(np.angle(residual[0]))
    residual[0] = 0.0
    if np.linalg.norm(residual) > 1e-9:
        raise dyn.PropagationError(f"synthesis left residual {np.linalg.norm(residual):.3e}")
    forward = tuple(type(p)(p.theta, _wrap(p.phi + np.pi)) for p in reversed(backward))
    # backward maps target -> e^{i gamma}|g,0>, so forward maps |g,0> -> e^{-i gamma} target
    return PulseSequence(forward, gamma)


def mode_state_from_sequence(seq: PulseSequence, boson_dim: int) -> np.ndarray:
    """Mode amplitudes after the sequence with the ancilla projected on |g>, global phase removed."""
    out = apply_sequence(seq, boson_dim).qubit_matrix()
    return out[0] * np.exp(1j * seq.global_phase)


# --------------------------------------------------------------- adiabatic map


@dataclass(frozen=True)
class ChirpProfile:
    """Linear detuning sweep with a raised-cosine coupling envelope.

    ``peak_rate`` is the single-qubit sideband rate g; the sweep runs from
    -delta_max to +delta_max (default ``DEFAULT_SPAN * g * sqrt(N)``).  All
    times are in units of 1/g when g = 1.
    """

    duration: float = DEFAULT_DURATION
    peak_rate: float = 1.0
    delta_max: float | None = None
    dt: float = DEFAULT_DT
    min_adiabaticity: float = 1.0

    def __post_init__(self):
        if self.duration <= 0 or self.peak_rate <= 0 or self.dt <= 0:
            raise ValueError("duration, peak_rate and dt must be positive")
        if self.delta_max is not None and self.delta_max <= 0:
            raise ValueError("delta_max must be positive")

    def span(self, N: int) -> float:
        if self.delta_max is not None:
            return float(self.delta_max)
        return DEFAULT_SPAN * self.peak_rate * np.sqrt(N)

    def detuning(self, t: float, N: int) -> float:
        D = self.span(N)
        return -D + 2.0 * D * t / self.duration

    def envelope(self, t: float) -> float:
        return self.peak_rate * np.sin(np.pi * t / self.duration) ** 2

    def sweep_rate(self, N: int) -> float:
        return 2.0 * self.span(N) / self.duration

    def adiabaticity(self, N: int, n_grid: int = 401) -> float:
        """min over sectors and time of (top gap)^2 / sweep rate."""
        worst = np.inf
        for k in range(1, N + 1):
            for t in np.linspace(0.0, self.duration, n_grid):
                w = np.linalg.eigvalsh(sector_hamiltonian(N, k, self.detuning(t, N), self.envelope(t)))
                worst = min(worst, w[-1] - w[-2])
        return float(worst**2 / self.sweep_rate(N))

    def check(self, N: int) -> float:
        a = self.adiabaticity(N)
        if a < self.min_adiabaticity:
            raise ValueError(f"adiabaticity {a:.3g} below threshold {self.min_adiabaticity:.3g}")
        return a

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ChirpProfile":
        return cls(**json.loads(text))

    @classmethod
    def from_dict(cls, d: dict) -> "ChirpProfile":
        return cls(**d)


def sector_hamiltonian(N: int, k: int, delta: float, omega: float) -> np.ndarray:
    """H on |D_{N,j}>|k-j>, j = 0..min(k, N)."""
    js = np.arange(min(k, N) + 1)
    off = omega * np.sqrt(k - js[:-1]) * np.sqrt((js[:-1] + 1) * (N - js[:-1]))
    return np.diag(delta * js.astype(float)) + np.diag(off, 1) + np.diag(off, -1)


def _sector_propagator(N: int, k: int, profile: ChirpProfile) -> np.ndarray:
    n_steps = max(1, int(np.ceil(profile.duration / profile.dt - 1e-12)))
    h = profile.duration / n_steps
    H = lambda t: sector_hamiltonian(N, k, profile.detuning(t, N), profile.envelope(t))
    U = np.eye(min(k, N) + 1, dtype=complex)
    for s in range(n_steps):
        U = dyn._magnus4_step(H, s * h, h) @ U
    return U


def _mode_amplitudes(mode_state, N: int) -> np.ndarray:
    if isinstance(mode_state, StateVector):
        if mode_state.n_qubits:
            raise ValueError("mode state must not carry qubits")
        amps = mode_state.amplitudes
    else:
        amps = np.asarray(mode_state, dtype=complex).ravel()
    if amps.size < N + 1:
        raise ValueError(f"mode truncation {amps.size} too small for N={N}; need >= N+1")
    n = np.linalg.norm(amps)
    if n == 0:
        raise ValueError("empty mode state")
    return amps / n


@dataclass
class MapResult:
    final: StateVector
    fidelity_raw: float
    fidelity_phase_corrected: float
    sector_amplitudes: dict = field(default_factory=dict)  # k -> <D_{N,k},0| U |k, g..g>

    @property
    def sector_fidelities(self) -> dict:
        return {k: float(abs(a) ** 2) for k, a in self.sector_amplitudes.items()}


def _embed(N: int, D: int, k: int, v: np.ndarray) -> np.ndarray:
    out = np.zeros(2**N * D, dtype=complex)
    for j, a in enumerate(v):
        if a != 0:
            fock = np.zeros(D)
            fock[k - j] = 1.0
            out += a * np.kron(dicke_vector(N, j), fock)
    return out


def _fidelities(N: int, D: int, cc: np.ndarray, finals: dict) -> MapResult:
    psi = np.zeros(2**N * D, dtype=complex)
    corrected = np.zeros_like(psi)
    amps = {}
    for k, v in finals.items():
        amps[k] = complex(v[-1]) if k <= N else 0j
        vec = _embed(N, D, k, v)
        psi += cc[k] * vec
        phase = np.exp(-1j * np.angle(amps[k])) if abs(amps[k]) > 0 else 1.0
        corrected += cc[k] * phase * vec
    target = np.kron(assemble_symmetric(cc[: N + 1]).amplitudes, np.eye(D)[0])
    raw = float(abs(np.vdot(target, psi)) ** 2)
    fc = float(abs(np.vdot(target, corrected)) ** 2)
    return MapResult(StateVector(psi, N, D), raw, fc, amps)


def adiabatic_map(N: int, profile: ChirpProfile | None = None, mode_state=None) -> MapResult:
    """Chirped collective passage from sum_k c_k |k>|g..g> towards sum_k c_k |D_{N,k}>|0>.

    Each occupied Fock sector is integrated once; by linearity that run is
    also its phase reference.  The phase-corrected fidelity removes the
    phase of every <D_{N,k},0|U|k,g..g> before comparing with the target.
    """
    profile = profile or ChirpProfile()
    cc = _mode_amplitudes(mode_state if mode_state is not None else np.eye(N + 2)[0], N)
    D = cc.size
    if np.linalg.norm(cc[N + 1 :]) > 1e-12:
        raise ValueError(f"mode state has population above {N} quanta")
    finals = {}
    for k in range(N + 1):
        if abs(cc[k]) <= SKIP_TOL:
            continue
        if k == 0:
            finals[0] = np.array([1.0 + 0j])
            continue
        U = _sector_propagator(N, k, profile)
        finals[k] = U[:, 0]
    return _fidelities(N, D, cc, finals)


def adiabatic_map_dense(N: int, profile: ChirpProfile | None = None, mode_state=None,
                        n_samples: int = 0):
    """Same passage integrated on the full 2^N x D register.

    Returns a :class:`MapResult`; with ``n_samples`` it also returns the
    sampled :class:`~symprep.dynamics.Trajectory`.
    """
    profile = profile or ChirpProfile()
    cc = _mode_amplitudes(mode_state if mode_state is not None else np.eye(N + 2)[0], N)
    D = cc.size
    lows = [dyn.sigma_minus(N, q, D) for q in range(1, N + 1)]
    Jp = sum(s.conj().T for s in lows)
    a = dyn.annihilation(N, D)
    hop = a @ Jp
    hop = hop + hop.conj().T
    nq = np.diag(dyn.number_diagonal(N, range(1, N + 1), D))
    H = lambda t: profile.detuning(t, N) * nq + profile.envelope(t) * hop
    psi0 = np.kron(np.eye(2**N)[0], cc)
    if n_samples:
        traj = dyn.propagate_trajectory(H, psi0, profile.duration, dt=profile.dt, n_samples=n_samples)
        psi = traj.final
    else:
        traj = None
        psi = dyn.propagate(H, psi0, profile.duration, dt=profile.dt)
    target = np.kron(assemble_symmetric(cc[: N + 1]).amplitudes, np.eye(D)[0])
    raw = float(abs(np.vdot(target, psi)) ** 2)
    # per-sector phases from the same run: project onto |D_{N,k}>|0>
    corrected = np.zeros_like(psi)
    amps = {}
    for k in range(N + 1):
        if abs(cc[k]) <= SKIP_TOL:
            continue
        v = np.kron(dicke_vector(N, k), np.eye(D)[0])
        ov = np.vdot(v, psi)
        amps[k] = complex(ov / cc[k])
        corrected += ov * np.exp(-1j * np.angle(amps[k])) * v
    fc = float(abs(np.vdot(target, corrected)) ** 2)
    res = MapResult(StateVector(psi, N, D), raw, fc, amps)
    return (res, traj) if n_samples else res


@dataclass
class FockRouteResult:
    final: StateVector
    fidelity_raw: float
    fidelity_phase_corrected: float
    sequence: PulseSequence
    synthesis_error: float
    sector_amplitudes: dict


def fock_route_prepare(c: SymmetricCoefficients | Sequence[complex], N: int | None = None,
                       profile: ChirpProfile | None = None, boson_truncation: int | None = None) -> FockRouteResult:
    """Synthesize sum_k c_k |k> in the mode, then map it onto sum_k c_k |D_{N,k}>.

    Fidelities are taken against the target tensored with the mode vacuum.
    ``synthesis_error`` is the distance between the synthesized mode state
    and the requested one.
    """
    if not isinstance(c, SymmetricCoefficients):
        c = SymmetricCoefficients(c)
    if N is None:
        N = c.N
    if N != c.N:
        raise ValueError(f"{c.N + 1} coefficients do not describe N={N} qubits")
    D = boson_truncation if boson_truncation is not None else N + 2
    if D < N + 1:
        raise ValueError(f"mode truncation {D} too small for N={N}; need >= N+1")
    profile = profile or ChirpProfile()
    profile.check(N)
    seq = law_eberly_synthesize(c)
    mode = mode_state_from_sequence(seq, D)
    want = np.zeros(D, dtype=complex)
    want[: N + 1] = c.c
    err = float(np.linalg.norm(mode - want))
    res = adiabatic_map(N, profile, mode)
    return FockRouteResult(res.final, res.fidelity_raw, res.fidelity_phase_corrected, seq, err, res.sector_amplitudes)
