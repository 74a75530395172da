"""
Command-line entry point.

    symprep encode     --target 1,2,3,4,5 --normalize
    symprep prepare    --reference-table2 [--backend full --truncation 6]
    symprep fock-route --target dicke:10:2 --truncation 12
    symprep classify   --target ghz:4

Every command accepts ``--config run.json`` (keys named like the long flags,
with dashes as underscores); flags given on the command line win.  Reports
go to stdout as JSON, and ``--out-dir`` additionally writes the files listed
in each command's help.  Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import classifier, compiler, dynamics, encoder, fock_route
from .states import SymmetricCoefficients, staircase_superposition

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
NORMALISATION_TOL = 1e-6
UNITS_NOTE = "rates in units of g1, times in units of 1/g1"
REFERENCE_TARGET = [1, 2, 3, 4, 5]


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ parsing


def _parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex pair must have two entries, got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, (int, float)):
        return complex(x)
    try:
        return complex(str(x).strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"cannot parse coefficient {x!r}") from None


def _named_target(spec: str) -> list[complex]:
    parts = spec.split(":")
    name = parts[0].lower()
    try:
        args = [int(p) for p in parts[1:]]
    except ValueError:
        raise ConfigError(f"bad named target {spec!r}") from None
    if name == "dicke" and len(args) == 2:
        N, k = args
        if not 0 <= k <= N:
            raise ConfigError(f"dicke:{N}:{k} needs 0 <= k <= N")
        c = [0.0] * (N + 1)
        c[k] = 1.0
        return c
    if name == "ghz" and len(args) == 1:
        c = [0.0] * (args[0] + 1)
        c[0] = c[-1] = 1.0
        return c
    if name == "w" and len(args) == 1:
        return _named_target(f"dicke:{args[0]}:1")
    if name == "ground" and len(args) == 1:
        return _named_target(f"dicke:{args[0]}:0")
    raise ConfigError(f"unknown named target {spec!r}; use dicke:N:k, ghz:N, w:N or ground:N")


def parse_target(value, normalize: bool = False) -> SymmetricCoefficients:
    """Coefficients from a list, an inline string, a named state or a file.

    Inline strings are comma separated (``"1,2j,0.5-1j"``); named states are
    ``dicke:N:k``, ``ghz:N``, ``w:N`` and ``ground:N``; anything else is read
    as a file holding a JSON list (entries may be ``[re, im]`` pairs) or
    whitespace/comma separated numbers.  Explicit coefficients must be
    normalised to within 1e-6 unless ``normalize`` is set.
    """
    named = False
    if isinstance(value, str):
        v = value.strip()
        if re.match(r"^[a-zA-Z]+:", v):
            raw, named = _named_target(v), True
        elif Path(v).is_file():
            text = Path(v).read_text()
            try:
                data = json.loads(text)
                if isinstance(data, dict):
                    data = data.get("target", data.get("c"))
                raw = list(data)
            except (json.JSONDecodeError, TypeError):
                raw = [t for t in re.split(r"[,\s]+", text.strip()) if t]
        else:
            raw = [t for t in v.split(",") if t.strip()]
    elif isinstance(value, (list, tuple)):
        raw = list(value)
    else:
        raise ConfigError(f"cannot interpret target {value!r}")
    c = np.array([_parse_complex(x) for x in raw], dtype=complex)
    if c.size < 2:
        raise ConfigError("a target needs at least two coefficients")
    if not np.all(np.isfinite(c)):
        raise ConfigError("target coefficients must be finite")
    norm = float(np.linalg.norm(c))
    if norm == 0:
        raise ConfigError("target coefficients are all zero")
    if not (named or normalize) and abs(norm - 1.0) > NORMALISATION_TOL:
        raise ConfigError(f"target norm is {norm:.8g}; pass --normalize to rescale")
    return SymmetricCoefficients(c)


_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}


def parse_physical_g1(text) -> float:
    """Angular frequency in rad/s from ``"2pi*20kHz"``, ``"20kHz"`` or a bare rad/s number.

    A value carrying a Hz unit is a cyclic frequency and is multiplied by
    2 pi; the ``2pi*`` prefix may be written for clarity.
    """
    if isinstance(text, (int, float)):
        val = float(text)
    else:
        s = str(text).strip().lower().replace(" ", "").replace("π", "pi")
        s = re.sub(r"^2\*?pi\*?", "", s)
        m = re.fullmatch(r"([0-9.eE+-]+)(hz|khz|mhz|ghz)?", s)
        if not m:
            raise ConfigError(f"cannot parse physical g1 {text!r}")
        try:
            val = float(m.group(1))
        except ValueError:
            raise ConfigError(f"cannot parse physical g1 {text!r}") from None
        if m.group(2):
            val = 2 * np.pi * val * _FREQ_UNITS[m.group(2)]
    if not val > 0:
        raise ConfigError("physical g1 must be positive")
    return val


def _float_list(x) -> list[float]:
    if isinstance(x, (int, float)):
        return [float(x)]
    if isinstance(x, str):
        return [float(t) for t in x.split(",") if t.strip()]
    return [float(t) for t in x]


# ------------------------------------------------------------------ output


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True)


def _write(out_dir: Path | None, name: str, text: str) -> None:
    if out_dir is None:
        return
    path = out_dir / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _out_dir(cfg) -> Path | None:
    d = cfg.get("out_dir")
    if d is None:
        return None
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ----------------------------------------------------------------- commands


def _check_n(cfg, c: SymmetricCoefficients) -> int:
    n = cfg.get("n")
    if n is not None and int(n) != c.N:
        raise ConfigError(f"--n {n} does not match {len(c)} coefficients (N={c.N})")
    return c.N


def cmd_encode(cfg) -> dict:
    """Writes ``circuit.json`` and ``encode_report.json``."""
    c = parse_target(cfg.get("target"), cfg.get("normalize", False))
    N = _check_n(cfg, c)
    circuit = encoder.build_circuit(encoder.staircase_decompose(c), N)
    state = encoder.apply_circuit(circuit)
    residual = np.linalg.norm(state.amplitudes - staircase_superposition(c).amplitudes)
    nontrivial = sum(1 for g in circuit.gates if abs(g.pair.beta) > 0 or abs(g.pair.alpha - 1) > 0)
    report = {
        "command": "encode",
        "n_qubits": N,
        "n_gates": len(circuit),
        "nontrivial_gates": nontrivial,
        "residual": float(residual),
        "gates": json.loads(circuit.to_json()),
    }
    out = _out_dir(cfg)
    _write(out, "circuit.json", circuit.to_json() + "\n")
    _write(out, "encode_report.json", _dump(report) + "\n")
    return report


def _drive_from(cfg) -> dynamics.DriveConfig:
    base = compiler.DEFAULT_DRIVE
    delta1 = float(cfg.get("delta1", base.delta1))
    g2 = float(cfg.get("g2", base.g2))
    g1 = float(cfg.get("g1", base.g1))
    return dynamics.DriveConfig(g1=g1, g2=g2, delta1=delta1, delta2=delta1)


def _max_trace_deviation(a: compiler.ExecutionResult, b: compiler.ExecutionResult) -> list[float]:
    out = []
    for ta, tb in zip(a.traces, b.traces):
        out.append(max(float(np.max(np.abs(ta.populations[k] - tb.populations[k]))) for k in ta.populations))
    return out


def cmd_prepare(cfg) -> dict:
    """Writes ``schedule.json``, ``prepare_report.json``, ``table2.csv``,
    ``table2.txt`` and, when sampling, ``traces/<backend>_step_XX.csv``."""
    if cfg.get("reference_table2"):
        c = SymmetricCoefficients(REFERENCE_TARGET)
    else:
        if cfg.get("target") is None:
            raise ConfigError("prepare needs --target or --reference-table2")
        c = parse_target(cfg.get("target"), cfg.get("normalize", False))
    N = _check_n(cfg, c)
    backend = cfg.get("backend", "effective")
    if backend not in ("effective", "full"):
        raise ConfigError(f"backend must be 'effective' or 'full', got {backend!r}")
    truncation = cfg.get("truncation")
    if backend == "full":
        if truncation is None:
            raise ConfigError("--backend full needs --truncation")
        if int(truncation) < 2:
            raise ConfigError("--truncation must be >= 2")
    compensation = cfg.get("compensation", "dressed")
    if compensation not in compiler.COMPENSATIONS:
        raise ConfigError(f"compensation must be one of {compiler.COMPENSATIONS}")
    drive = _drive_from(cfg)
    samples = int(cfg.get("samples", 101 if backend == "full" else 0))
    schedule = compiler.make_schedule(N, c, drive, skip_zero_amplitude=bool(cfg.get("skip_zero", False)))
    eff = compiler.execute(schedule, "effective", compensation=compensation, n_samples=samples)
    report = {
        "command": "prepare",
        "units": UNITS_NOTE,
        "n_qubits": N,
        "n_steps": len(schedule),
        "total_duration": schedule.total_duration,
        "compensation": compensation,
        "effective": {"per_step_fidelity": eff.per_step_fidelity, "final_fidelity": eff.final_fidelity},
        "table2": compiler.table2_rows(schedule, eff.per_step_fidelity),
    }
    out = _out_dir(cfg)
    runs = {"effective": eff}
    if backend == "full":
        full = compiler.execute(schedule, "full", compensation=compensation,
                                boson_truncation=int(truncation), n_samples=samples)
        runs["full"] = full
        dev = _max_trace_deviation(eff, full)
        report["full"] = {
            "boson_truncation": int(truncation),
            "per_step_fidelity": full.per_step_fidelity,
            "final_fidelity": full.final_fidelity,
            "max_population_deviation_per_step": dev,
            "max_population_deviation": max(dev) if dev else 0.0,
        }
    if cfg.get("physical_g1") is not None:
        g1 = parse_physical_g1(cfg["physical_g1"])
        phys = compiler.physical_units(schedule, g1)
        report["physical"] = {"g1_rad_per_s": g1, "total_time_s": phys["total_time"],
                              "per_step_s": phys["per_step"]}
    _write(out, "schedule.json", schedule.to_json() + "\n")
    _write(out, "table2.csv", compiler.format_table2(report["table2"], as_csv=True))
    _write(out, "table2.txt", compiler.format_table2(report["table2"]))
    for name, res in runs.items():
        for tr in res.traces:
            _write(out, f"traces/{name}_step_{tr.step + 1:02d}.csv", tr.to_csv())
    _write(out, "prepare_report.json", _dump(report) + "\n")
    return report


def _profile_from(cfg) -> fock_route.ChirpProfile:
    d = dict(cfg.get("profile") or {})
    if cfg.get("duration") is not None:
        d["duration"] = float(cfg["duration"])
    try:
        return fock_route.ChirpProfile.from_dict(d)
    except TypeError as exc:
        raise ConfigError(f"bad chirp profile: {exc}") from None


def cmd_fock_route(cfg) -> dict:
    """Writes ``pulses.json``, ``profile.json`` and ``fock_report.json``.

    ``--durations T1,T2,...`` runs a grid of passage durations and reports
    whether the raw fidelity is monotone along it.
    """
    c = parse_target(cfg.get("target"), cfg.get("normalize", False))
    N = _check_n(cfg, c)
    truncation = int(cfg.get("truncation") or N + 2)
    if truncation < N + 1:
        raise ConfigError(f"--truncation {truncation} too small; need >= N+1 = {N + 1}")
    profile = _profile_from(cfg)
    durations = _float_list(cfg["durations"]) if cfg.get("durations") else [profile.duration]
    runs = []
    seq = None
    for T in durations:
        prof = fock_route.ChirpProfile.from_dict({**json.loads(profile.to_json()), "duration": T})
        res = fock_route.fock_route_prepare(c, N, prof, truncation)
        seq = res.sequence
        runs.append({
            "duration": T,
            "fidelity_raw": res.fidelity_raw,
            "fidelity_phase_corrected": res.fidelity_phase_corrected,
            "sector_fidelity": {str(k): float(abs(a) ** 2) for k, a in sorted(res.sector_amplitudes.items())},
            "adiabaticity": prof.adiabaticity(N),
            "synthesis_error": res.synthesis_error,
        })
    report = {
        "command": "fock-route",
        "units": "rates in units of the sideband rate g, times in units of 1/g",
        "n_qubits": N,
        "boson_truncation": truncation,
        "n_pulses": len(seq),
        "pulses": json.loads(seq.to_json()),
        "runs": runs,
    }
    if len(runs) > 1:
        raw = [r["fidelity_raw"] for r in runs]
        report["monotone_raw_fidelity"] = bool(all(b >= a - 1e-9 for a, b in zip(raw, raw[1:])))
    out = _out_dir(cfg)
    _write(out, "pulses.json", seq.to_json() + "\n")
    _write(out, "profile.json", profile.to_json() + "\n")
    _write(out, "fock_report.json", _dump(report) + "\n")
    return report


def cmd_classify(cfg) -> dict:
    """Writes ``classification.json``."""
    c = parse_target(cfg.get("target"), cfg.get("normalize", False))
    _check_n(cfg, c)
    res = classifier.classify(c, float(cfg.get("rel_tol", classifier.DEFAULT_REL_TOL)))
    report = json.loads(res.to_json())
    _write(_out_dir(cfg), "classification.json", res.to_json() + "\n")
    return report


COMMANDS = {
    "encode": cmd_encode,
    "prepare": cmd_prepare,
    "fock-route": cmd_fock_route,
    "classify": cmd_classify,
}


# ------------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symprep", description="Symmetric-state preparation: compile, simulate, classify.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration; flags override its keys")
        sp.add_argument("--target", help="coefficients: '1,2,3', dicke:N:k, ghz:N, w:N, ground:N or a file")
        sp.add_argument("--normalize", action="store_true", default=None, help="rescale unnormalised coefficients")
        sp.add_argument("--n", type=int, help="number of qubits (checked against the target)")
        sp.add_argument("--out-dir", help="directory for machine-readable outputs")

    sp = sub.add_parser("encode", help="staircase encoding circuit")
    common(sp)

    sp = sub.add_parser("prepare", help="compile and simulate the selective-flop protocol")
    common(sp)
    sp.add_argument("--backend", choices=["effective", "full"])
    sp.add_argument("--g2", type=float, help="|g2| in units of g1")
    sp.add_argument("--delta1", type=float, help="Delta1 in units of g1")
    sp.add_argument("--truncation", type=int, help="bus Fock truncation for --backend full")
    sp.add_argument("--physical-g1", help="physical g1, e.g. 2pi*20kHz, for times in seconds")
    sp.add_argument("--reference-table2", action="store_true", default=None,
                    help="use the 4-qubit reference target c_k ~ k+1 with the default drive")
    sp.add_argument("--skip-zero", action="store_true", default=None, help="drop steps whose source amplitude vanishes")
    sp.add_argument("--samples", type=int, help="population samples per step (trajectory CSVs)")
    sp.add_argument("--compensation", choices=list(compiler.COMPENSATIONS))

    sp = sub.add_parser("fock-route", help="Fock-state synthesis plus adiabatic mapping")
    common(sp)
    sp.add_argument("--truncation", type=int, help="mode truncation (default N+2)")
    sp.add_argument("--duration", type=float, help="passage duration in units of 1/g")
    sp.add_argument("--durations", help="comma separated grid of durations")

    sp = sub.add_parser("classify", help="SLOCC degeneracy class from Majorana roots")
    common(sp)
    sp.add_argument("--rel-tol", type=float, help="root clustering tolerance")
    return p


def _merge_config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _merge_config(args)
        report = COMMANDS[args.command](cfg)
    except (ConfigError, OSError) as exc:
        print(f"symprep: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (dynamics.PropagationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"symprep: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"symprep: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(_dump(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
