"""Command line interface: strength sweeps to CSV and process matrices to JSON.

Three subcommands share one JSON config format:

* ``collapse``    sweep of the single-measurement sequence
* ``uncollapse``  sweep of the reversal sequence (adds a p_success column)
* ``qpt``         process-fidelity sweep plus full chi matrices

All numeric output is serialized with 12 significant digits and LF line
endings, so identical configs and seeds produce byte-identical files.
Exit codes: 2 for a bad config, 3 for a numeric failure during the run.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import SimulationError
from .montecarlo import estimate_probabilities
from .protocol import ExperimentConfig, PulseTiming
from .qpt import exact_uncollapse_chi, montecarlo_uncollapse_chi, process_fidelity
from .qubit import DeviceParams, PureState
from .tomography import bloch_reconstruct, exact_tomography_record, polar_azimuth

COLLAPSE_HEADER = ["p", "P_X", "P_Y", "P_Z", "P_B", "X", "Y", "Z", "theta"]
UNCOLLAPSE_HEADER = COLLAPSE_HEADER + ["p_success"]
QPT_HEADER = ["p", "fidelity"]

DEFAULT_P_GRID = [round(0.05 * i, 10) for i in range(20)]   # 0.00 .. 0.95

DEFAULT_CONFIG = {
    "theta0_rad": math.pi / 2.0,
    "phi0_rad": 0.0,
    "p_grid": DEFAULT_P_GRID,
    "pi_fraction": 1.0,
    "phi_m_rate_rad": 4.0 * math.pi,
    "decoherence": False,
    "use_echo_t2": True,
    "p_error_fraction": 0.0,
    "mode": "exact",
    "shots": 20000,
    "seed": 12345,
    "chi_p": [0.47],
    "device": {
        "t1_ns": 450.0,
        "t2_echo_ns": 350.0,
        "t2_ramsey_ns": 120.0,
        "e10_ghz": 6.75,
        "visibility": 1.0,
    },
    "timing_ns": {
        "prepare": 10.0,
        "measure": 3.0,
        "idle": 8.0,
        "pi_pulse": 10.0,
        "tomography": 10.0,
    },
}


class ConfigError(Exception):
    """The run configuration cannot be used."""


@dataclass(frozen=True)
class SweepSpec:
    """Sweep plan extracted from the config and command line."""

    p_grid: tuple
    mode: str
    shots: int
    seed: int
    chi_p: tuple

    def __post_init__(self):
        if self.mode not in ("exact", "mc"):
            raise ConfigError(f"mode must be 'exact' or 'mc', got {self.mode!r}")
        if not self.p_grid:
            raise ConfigError("p_grid must not be empty")
        previous = -1.0
        for value in self.p_grid + self.chi_p:
            if not 0.0 <= value < 1.0:
                raise ConfigError(f"strength {value} outside [0, 1)")
        for value in self.p_grid:
            if value <= previous:
                raise ConfigError("p_grid must be strictly increasing")
            previous = value
        if self.shots < 1:
            raise ConfigError("shots must be at least 1")


def _merge(defaults: dict, overrides: dict, context: str) -> dict:
    merged = dict(defaults)
    for key, value in overrides.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {context}{key!r}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {context}{key!r} must be an object")
            merged[key] = _merge(defaults[key], value, context=f"{key}.")
        else:
            merged[key] = value
    return merged


def load_config(path: str | None) -> dict:
    """Read and validate a config file, filling in defaults."""
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return _merge(DEFAULT_CONFIG, raw, context="")


def assemble(config: dict, args: argparse.Namespace) -> tuple[SweepSpec, ExperimentConfig]:
    """Combine config values and flag overrides into run inputs."""
    if args.mode is not None:
        config["mode"] = args.mode
    if args.shots is not None:
        config["shots"] = args.shots
    if args.seed is not None:
        config["seed"] = args.seed
    if args.pi_fraction is not None:
        config["pi_fraction"] = args.pi_fraction
    if args.no_decoherence:
        config["decoherence"] = False
    try:
        sweep = SweepSpec(
            p_grid=tuple(float(v) for v in config["p_grid"]),
            mode=str(config["mode"]),
            shots=int(config["shots"]),
            seed=int(config["seed"]),
            chi_p=tuple(float(v) for v in config["chi_p"]),
        )
        device = DeviceParams(
            t1_ns=float(config["device"]["t1_ns"]),
            t2_echo_ns=float(config["device"]["t2_echo_ns"]),
            t2_ramsey_ns=float(config["device"]["t2_ramsey_ns"]),
            e10_ghz=float(config["device"]["e10_ghz"]),
            visibility=float(config["device"]["visibility"]),
        )
        timing = PulseTiming(
            prepare_ns=float(config["timing_ns"]["prepare"]),
            measure_ns=float(config["timing_ns"]["measure"]),
            idle_ns=float(config["timing_ns"]["idle"]),
            pi_pulse_ns=float(config["timing_ns"]["pi_pulse"]),
            tomography_ns=float(config["timing_ns"]["tomography"]),
        )
        base = ExperimentConfig(
            initial=PureState(float(config["theta0_rad"]), float(config["phi0_rad"])),
            p=0.0,
            pi_fraction=float(config["pi_fraction"]),
            device=device,
            decoherence_enabled=bool(config["decoherence"]),
            phi_m_rate=float(config["phi_m_rate_rad"]),
            timing=timing,
            use_echo_t2=bool(config["use_echo_t2"]),
            p_error_fraction=float(config["p_error_fraction"]),
        )
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from exc
    except SimulationError as exc:
        raise ConfigError(str(exc)) from exc
    return sweep, base


def _fmt(value: float) -> str:
    value = float(value)
    if value == 0.0:
        value = 0.0  # fold negative zero
    return format(value, ".12g")


def _write_rows(path: str, header: list, rows: list) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n", newline="\n")


def _sweep_rows(sweep: SweepSpec, base: ExperimentConfig, kind: str) -> list:
    rows = []
    for row_index, p in enumerate(sweep.p_grid):
        cfg = base.at_strength(p)
        if sweep.mode == "exact":
            record, outcome = exact_tomography_record(cfg, kind)
            p_success = outcome.p_success
        else:
            estimate = estimate_probabilities(
                cfg, sweep.shots, sweep.seed, kind=kind, stream_base=3 * row_index
            )
            record = estimate.record
            p_success = 1.0 - record.p_b
        vec = bloch_reconstruct(record)
        theta, _ = polar_azimuth(vec)
        row = [p, record.p_x, record.p_y, record.p_z, record.p_b, vec.x, vec.y, vec.z, theta]
        if kind == "uncollapse":
            row.append(p_success)
        rows.append(row)
    return rows


def cmd_collapse(sweep: SweepSpec, base: ExperimentConfig, out: str) -> None:
    _write_rows(out, COLLAPSE_HEADER, _sweep_rows(sweep, base, "collapse"))


def cmd_uncollapse(sweep: SweepSpec, base: ExperimentConfig, out: str) -> None:
    _write_rows(out, UNCOLLAPSE_HEADER, _sweep_rows(sweep, base, "uncollapse"))


def _chi_path(out: str, p: float) -> Path:
    stem = Path(out)
    return stem.with_name(f"{stem.stem}_chi_p{_fmt(p)}.json")


def cmd_qpt(sweep: SweepSpec, base: ExperimentConfig, out: str) -> None:
    def chi_at(p: float, stream_block: int):
        cfg = base.at_strength(p)
        if sweep.mode == "exact":
            return exact_uncollapse_chi(cfg)
        return montecarlo_uncollapse_chi(cfg, sweep.shots, sweep.seed + stream_block)

    rows = []
    for row_index, p in enumerate(sweep.p_grid):
        rows.append([p, process_fidelity(chi_at(p, row_index))])
    _write_rows(out, QPT_HEADER, rows)
    for extra_index, p in enumerate(sweep.chi_p):
        chi = chi_at(p, len(sweep.p_grid) + extra_index)
        payload = {
            "p": float(_fmt(p)),
            "basis": ["I", "X", "Y", "Z"],
            "chi_real": [[float(_fmt(v)) for v in row] for row in chi.matrix.real],
            "chi_imag": [[float(_fmt(v)) for v in row] for row in chi.matrix.imag],
            "fidelity": float(_fmt(process_fidelity(chi))),
        }
        _chi_path(out, p).write_text(json.dumps(payload, indent=2) + "\n", newline="\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uncollapse",
        description="Simulate partial-measurement collapse and its reversal on a single qubit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("collapse", "sweep the single-measurement sequence"),
        ("uncollapse", "sweep the measurement-reversal sequence"),
        ("qpt", "process tomography of the reversal sequence"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="JSON config path (defaults apply when omitted)")
        cmd.add_argument("--out", required=True, help="output CSV path")
        cmd.add_argument("--mode", choices=["exact", "mc"], help="override config mode")
        cmd.add_argument("--shots", type=int, help="override shots per setting")
        cmd.add_argument("--seed", type=int, help="override master seed")
        cmd.add_argument("--pi-fraction", type=float, dest="pi_fraction",
                         help="override recovery pulse fraction")
        cmd.add_argument("--no-decoherence", action="store_true",
                         help="force decoherence off regardless of config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        sweep, base = assemble(config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    handler = {"collapse": cmd_collapse, "uncollapse": cmd_uncollapse, "qpt": cmd_qpt}
    try:
        handler[args.command](sweep, base, args.out)
    except (SimulationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
