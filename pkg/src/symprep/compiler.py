"""
Selective-flop protocol: compile a target sum_k c_k |D_{N,k}> into an ordered
schedule of dispersive red-sideband steps and execute it.

Stage n (n = 1..N-1) drives qubits 1..n as the ensemble and qubit n+1 as the
extra qubit.  Step (n, k) rotates |D_{n,k-1}>|e> into |D_{n+1,k}> and is made
resonant by tuning delta = lam1 (2k - n - 1); within a stage k runs from n
down to 1.  The source component of step (n, k) is the staircase term with
K = k + N - n - 1 total excitations.

Off-resonant sectors pick up deterministic dispersive phases during every
step (the exchange term splits |D_{n,m-1}>|e> from |D_{n,m}>|g> by
2 lam1 (m - k)).  Left alone these scramble already-formed Dicke components,
so after each step a diagonal phase correction is applied (``compensation``):

* ``"none"``    -- nothing beyond frame bookkeeping;
* ``"bare"``    -- undo exp(-i H0 T), H0 the coupling-free part;
* ``"dressed"`` -- as ``"bare"`` plus the exact level shift that the
  off-resonant coupling adds to each two-level sector (default).
"""
from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field, replace
from math import comb
from typing import Sequence

import numpy as np

from . import dynamics as dyn
from .encoder import encode
from .states import (
    StateVector,
    SymmetricCoefficients,
    assemble_symmetric,
    dicke_vector,
    fidelity,
)

DEFAULT_DRIVE = dyn.DriveConfig(g1=1.0, g2=0.1, delta1=20.0, delta2=20.0)
SKIP_TOL = 1e-12
COMPENSATIONS = ("none", "bare", "dressed")
BACKENDS = ("effective", "full", "ideal")
TRACKED = ("dicke", "excited_branch", "ground_branch")


def _check_step(n: int, k: int) -> None:
    if n < 1 or not 1 <= k <= n:
        raise ValueError(f"invalid step (n={n}, k={k}); need 1 <= k <= n")


def flop_angle(n: int, k: int) -> float:
    """Rotation angle taking |D_{n,k-1}>|e> to |D_{n+1,k}>."""
    _check_step(n, k)
    return float(np.arccos(np.sqrt(comb(n, k - 1) / comb(n + 1, k))))


def flop_rate(n: int, k: int, beta: complex) -> float:
    """|<D_{n,k-1}, e| beta sum_i s_i s^+ |D_{n,k}, g>| = |beta| sqrt(k (n-k+1))."""
    _check_step(n, k)
    return float(abs(beta) * np.sqrt(k * (n - k + 1)))


def resonance_delta(n: int, k: int, lambda1: float) -> float:
    return lambda1 * (2 * k - n - 1)


@dataclass(frozen=True)
class StepPlan:
    n: int
    k: int
    ensemble: tuple
    extra: int
    delta_target: float
    delta2: float
    theta: float
    rabi: float
    duration: float
    drive_phase: float
    g2: float
    delta1: float

    @property
    def delta_units(self) -> int:
        """delta_target in units of lam1."""
        return 2 * self.k - self.n - 1

    def source_excitation(self, N: int) -> int:
        return self.k + N - self.n - 1

    def addressing(self, N: int) -> dyn.AddressingSpec:
        return dyn.AddressingSpec.stage(self.n, N)

    def drive(self, g1: complex) -> dyn.DriveConfig:
        return dyn.DriveConfig(g1, self.g2 * np.exp(1j * self.drive_phase), self.delta1, self.delta2)


@dataclass(frozen=True)
class Schedule:
    steps: tuple
    drive: dyn.DriveConfig
    target: SymmetricCoefficients

    @property
    def N(self) -> int:
        return self.target.N

    def __len__(self):
        return len(self.steps)

    @property
    def total_duration(self) -> float:
        return float(sum(s.duration for s in self.steps))

    def to_json(self) -> str:
        recs = []
        for s in self.steps:
            d = asdict(s)
            d["ensemble"] = list(s.ensemble)
            for key, val in d.items():
                if isinstance(val, float):
                    d[key] = float(f"{val:.12g}")
            d["delta_units"] = s.delta_units
            recs.append(d)
        return json.dumps(recs, indent=1)


def make_schedule(N: int, c: SymmetricCoefficients | Sequence[complex],
                  cfg: dyn.DriveConfig | None = None, skip_zero_amplitude: bool = False) -> Schedule:
    """Ordered flop schedule for target c.

    ``cfg`` supplies g1, |g2| and delta1; delta2 is solved per step.  Without
    skipping the schedule has N(N-1)/2 steps.
    """
    if N < 2:
        raise ValueError("the protocol needs N >= 2")
    if not isinstance(c, SymmetricCoefficients):
        c = SymmetricCoefficients(c)
    if c.N != N:
        raise ValueError(f"{len(c)} coefficients given for N={N}")
    cfg = cfg or DEFAULT_DRIVE
    g2_abs = abs(cfg.g2)
    lam1 = abs(cfg.g1) ** 2 / cfg.delta1
    steps = []
    for n in range(1, N):
        for k in range(n, 0, -1):
            if skip_zero_amplitude and abs(c.c[k + N - n - 1]) < SKIP_TOL:
                continue
            dtarget = resonance_delta(n, k, lam1)
            d2 = dyn.solve_delta2(dtarget, g2_abs, cfg.delta1, cfg.g1)
            p = dyn.derive_params(dyn.DriveConfig(cfg.g1, g2_abs, cfg.delta1, d2))
            # g2 phase that makes beta = -i|beta|: transfer amplitude then comes out real positive
            phase = float(np.angle(np.exp(1j * (-np.pi / 2 - np.angle(p.beta)))))
            theta = flop_angle(n, k)
            rabi = flop_rate(n, k, p.beta)
            steps.append(
                StepPlan(n, k, tuple(range(1, n + 1)), n + 1, dtarget, d2, theta, rabi,
                         theta / rabi, phase, g2_abs, cfg.delta1)
            )
    return Schedule(tuple(steps), cfg, c)


# --------------------------------------------------------------- execution

def _branch_vectors(n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """|D_{n,k-1}>|e> and |D_{n,k}>|g> on qubits 1..n+1."""
    e = np.array([0, 1], dtype=complex)
    g = np.array([1, 0], dtype=complex)
    return np.kron(dicke_vector(n, k - 1), e), np.kron(dicke_vector(n, k), g)


def ideal_transfer(amps: np.ndarray, N: int, n: int, k: int, theta: float, boson_dim: int = 0) -> np.ndarray:
    """Exact rotation A -> cos(theta) A + sin(theta) B on qubits 1..n+1, identity elsewhere."""
    A, B = _branch_vectors(n, k)
    M = amps.reshape(2 ** (n + 1), -1)
    a = A.conj() @ M
    b = B.conj() @ M
    ct, st = np.cos(theta), np.sin(theta)
    M = M + np.outer(A, (ct - 1) * a - st * b) + np.outer(B, st * a + (ct - 1) * b)
    return M.reshape(-1)


def _sector_projector(N: int, n: int, j: int, extra_excited: bool) -> np.ndarray:
    v = np.kron(dicke_vector(n, j), np.array([0, 1] if extra_excited else [1, 0], dtype=complex))
    return np.kron(np.outer(v, v.conj()), np.eye(2 ** (N - n - 1)))


def compensation_generator(step: StepPlan, N: int, p: dyn.DerivedParams, kind: str) -> np.ndarray:
    """Hermitian generator Hd; the correction applied after a step is exp(+i Hd T)."""
    if kind not in COMPENSATIONS:
        raise ValueError(f"unknown compensation {kind!r}")
    spec = step.addressing(N)
    if kind == "none":
        return np.zeros((2**N, 2**N), dtype=complex)
    Hd = dyn.effective_diagonal(spec, p)
    if kind == "dressed":
        n, k = step.n, step.k
        for m in range(1, n + 1):
            if m == k:
                continue
            gap = p.lambda1 * ((m - 1) * (n - m + 1) - m * (n - m)) - p.delta
            v2 = abs(p.beta) ** 2 * m * (n - m + 1)
            shift = np.sign(gap) * (np.sqrt(gap**2 + 4 * v2) - abs(gap)) / 2
            Hd = Hd + shift * (_sector_projector(N, n, m - 1, True) - _sector_projector(N, n, m, False))
    return Hd


@dataclass
class StepTrace:
    step: int
    n: int
    k: int
    times: np.ndarray
    populations: dict

    def labels(self) -> dict[str, str]:
        n, k = self.n, self.k
        return {
            "dicke": f"D({n + 1},{k})",
            "excited_branch": f"D({n},{k - 1})e",
            "ground_branch": f"D({n},{k})g",
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(self.populations)
        lab = self.labels()
        buf.write(",".join(["t", *(lab.get(x, x) for x in names)]) + "\n")
        for i, t in enumerate(self.times):
            buf.write(",".join([f"{t:.12g}", *(f"{self.populations[x][i]:.12g}" for x in names)]) + "\n")
        return buf.getvalue()


@dataclass
class ExecutionResult:
    final: StateVector
    per_step_fidelity: list
    final_fidelity: float
    traces: list = field(default_factory=list)
    backend: str = "effective"
    compensation: str = "dressed"


def _tracked_operators(N: int, n: int, k: int, names: Sequence[str], boson_dim: int) -> dict:
    A, B = _branch_vectors(n, k)
    D = dicke_vector(n + 1, k)
    vecs = {"dicke": D, "excited_branch": A, "ground_branch": B}
    rest = np.eye(2 ** (N - n - 1) * max(boson_dim, 1))
    out = {}
    for name in names:
        if name not in vecs:
            raise ValueError(f"unknown tracked state {name!r}; choose from {TRACKED}")
        v = vecs[name]
        out[name] = np.kron(np.outer(v, v.conj()), rest)
    return out


def _conditional_populations(states: np.ndarray, ops: dict, sector_mask: np.ndarray, normalise: bool) -> dict:
    """Populations inside the source sector; an empty sector reports zeros."""
    proj = states * sector_mask
    weight = np.sum(np.abs(proj) ** 2, axis=1)
    safe = np.where(weight > 1e-24, weight, np.inf)
    out = {}
    for name, P in ops.items():
        pop = np.real(np.einsum("ti,ij,tj->t", proj.conj(), P, proj))
        out[name] = pop / safe if normalise else pop
    return out


def execute(schedule: Schedule, backend: str = "effective", *, compensation: str = "dressed",
            boson_truncation: int | None = None, n_samples: int = 0,
            states_to_track: Sequence[str] = TRACKED, conditional: bool = True) -> ExecutionResult:
    """Run the schedule from the encoder output sum_k c_k |(k)>.

    ``per_step_fidelity[i]`` compares the evolved state with the ideal
    intermediate (all steps up to i applied as exact rotations).  With
    ``n_samples > 0`` the populations of |D_{n+1,k}>, |D_{n,k-1}>|e> and
    |D_{n,k}>|g> are sampled during every step, conditioned on the step's
    source excitation sector unless ``conditional=False``.  Samples are taken
    in the rotating frame of the step.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    if compensation not in COMPENSATIONS:
        raise ValueError(f"unknown compensation {compensation!r}")
    bdim = 0
    if backend == "full":
        if boson_truncation is None:
            raise ValueError("backend 'full' needs a boson truncation")
        if boson_truncation < 2:
            raise ValueError("boson truncation must be >= 2")
        bdim = boson_truncation
    N = schedule.N
    c = schedule.target
    psi = encode(c).amplitudes
    if bdim:
        vac = np.zeros(bdim, dtype=complex)
        vac[0] = 1.0
        psi = np.kron(psi, vac)
    ideal = encode(c).amplitudes
    fids, traces = [], []
    excit = dyn.excitation_diagonal(N, bdim)
    for i, step in enumerate(schedule.steps):
        T = step.duration
        spec = step.addressing(N)
        p = dyn.derive_params(step.drive(schedule.drive.g1))
        ideal = ideal_transfer(ideal, N, step.n, step.k, step.theta)
        if backend == "ideal":
            psi = ideal_transfer(psi, N, step.n, step.k, step.theta, bdim)
            fids.append(_fid_vs_ideal(ideal, psi, bdim))
            continue
        C = dyn._expm_hermitian(-compensation_generator(step, N, p, compensation) * T)
        if backend == "effective":
            H = dyn.build_effective_rotating(spec, p)
            frame = None
        else:
            H, F = dyn.full_bus_static(spec, step.drive(schedule.drive.g1), bdim)
            stark = p.lambda1 * dyn.number_diagonal(N, spec.ensemble, bdim)
            stark = stark + (p.lambda2 + p.delta) * dyn.number_diagonal(N, [spec.extra], bdim)
            frame = F + stark  # static-frame -> effective rotating frame: exp(+i frame t)
            C = np.kron(C, np.eye(bdim))
        if n_samples:
            traj = dyn.propagate_trajectory(H, psi, T, n_samples=n_samples)
            states = traj.states
            if frame is not None:
                states = states * np.exp(1j * np.outer(traj.times, frame))
            ops = _tracked_operators(N, step.n, step.k, states_to_track, bdim)
            mask = (excit == step.source_excitation(N)).astype(float)
            pops = _conditional_populations(states, ops, mask, conditional)
            traces.append(StepTrace(i, step.n, step.k, traj.times, pops))
            psi = states[-1]
        else:
            psi = dyn.propagate(H, psi, T)
            if frame is not None:
                psi = np.exp(1j * frame * T) * psi
        psi = C @ psi
        if not np.all(np.isfinite(psi)):
            raise dyn.PropagationError(f"non-finite state after step {i + 1}")
        fids.append(_fid_vs_ideal(ideal, psi, bdim))
    final = StateVector(psi, N, bdim)
    target = assemble_symmetric(c)
    if bdim:
        final_fid = _fid_vs_ideal(target.amplitudes, psi, bdim)
    else:
        final_fid = fidelity(target, final)
    return ExecutionResult(final, fids, float(final_fid), traces, backend, compensation)


def _fid_vs_ideal(ideal: np.ndarray, psi: np.ndarray, bdim: int) -> float:
    if bdim:
        psi = psi.reshape(-1, bdim)[:, 0]
    return float(abs(np.vdot(ideal, psi)) ** 2)


def trace_probabilities(schedule: Schedule, states_to_track: Sequence[str] = TRACKED, *,
                        n_samples: int = 101, backend: str = "effective", **kwargs) -> list[StepTrace]:
    """Sampled populations of the three states of each step (see :func:`execute`)."""
    for name in states_to_track:
        if name not in TRACKED:
            raise ValueError(f"unknown tracked state {name!r}; choose from {TRACKED}")
    return execute(schedule, backend, n_samples=n_samples, states_to_track=states_to_track, **kwargs).traces


def physical_units(schedule: Schedule, g1_physical: float) -> dict:
    """Durations in seconds for a physical g1 given as an angular frequency (rad/s)."""
    if not g1_physical > 0:
        raise ValueError("g1_physical must be a positive angular frequency")
    g1_abs = abs(schedule.drive.g1)
    per_step = [s.duration / (g1_physical / g1_abs) for s in schedule.steps]
    return {"total_time": float(sum(per_step)), "per_step": per_step}


def table2_rows(schedule: Schedule, fidelities: Sequence[float] | None = None) -> list[dict]:
    rows = []
    for i, s in enumerate(schedule.steps):
        rows.append(
            {
                "step": i + 1,
                "delta_over_lambda1": s.delta_units,
                "g2": s.g2,
                "delta2": s.delta2,
                "delta1": s.delta1,
                "fidelity": None if fidelities is None else float(fidelities[i]),
            }
        )
    return rows


def format_table2(rows: Sequence[dict], as_csv: bool = False) -> str:
    header = ["step", "delta/lambda1", "g2", "Delta2", "Delta1", "fidelity"]
    lines = []
    for r in rows:
        fid = "" if r["fidelity"] is None else f"{r['fidelity']:.3f}"
        lines.append([str(r["step"]), f"{r['delta_over_lambda1']:+d}", f"{r['g2']:.4g}",
                      f"{r['delta2']:.4f}", f"{r['delta1']:.4g}", fid])
    if as_csv:
        return "# rates in units of g1\n" + "\n".join(",".join(x) for x in [header, *lines]) + "\n"
    widths = [max(len(h), *(len(l[j]) for l in lines)) for j, h in enumerate(header)]
    out = ["# rates in units of g1", "  ".join(h.rjust(w) for h, w in zip(header, widths))]
    out += ["  ".join(x.rjust(w) for x, w in zip(l, widths)) for l in lines]
    return "\n".join(out) + "\n"


def with_selectivity(cfg: dyn.DriveConfig, ratio: float) -> dyn.DriveConfig:
    """Drive with |g2| rescaled so that lam1/|beta| is roughly ``ratio``."""
    return replace(cfg, g2=abs(cfg.g1) / ratio)
