"""Command-line front end.

Subcommands build a scenario, run the exact / coarse-grained / circuit /
sampling / estimation pipelines, and write CSV + JSON artifacts (plus PNG
renderings) into an output directory.  All randomness flows from the single
--seed value recorded in every file header; reruns with the same
configuration are byte-identical.

Exit codes: 0 success, 2 configuration or validation failure, 1 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from . import figures
from .estimators import convergence_curve, work_moments
from .phase_estimation import (
    SamplerConfig,
    convolve_distribution,
    rectangular_coarse_grain,
    sample,
    simulate_circuit,
    sup_norm_distance,
    work_values,
)
from .scenarios import ScenarioSpec, build_protocol
from .spectral import thermal_state
from .work_povm import exact_work_distribution, jarzynski_exact

CIRCUIT_SIZE_LIMIT = 1 << 20  # joint amplitudes above this skip the circuit column

DEFAULTS = {
    "scenario": "gue",
    "n_qubits": 4,
    "m_qubits": 5,
    "e_max": 1.0,
    "beta": 1.0,
    "seed": 7,
    "k_grid": "100,1000,10000",
    "k": 10000,
    "out": "qwork_out",
    "theta": float(np.pi / 2),
    "omega1": 0.6,
    "omega2": 1.0,
    "h": None,
    "h_tilde": None,
    "u": "identity",
    "m_sweep": None,
    "figures": True,
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation: scenario plus command parameters."""

    command: str
    scenario: ScenarioSpec
    m_qubits: int
    beta: float
    k_grid: list
    k: int
    seed: int
    out: Path
    m_sweep: list
    figures: bool

    def sampler(self, m_qubits=None) -> SamplerConfig:
        return SamplerConfig(
            m_qubits=self.m_qubits if m_qubits is None else m_qubits,
            e_max=self.scenario.e_max,
        )


def _parse_int_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError as exc:
        raise ValueError(f"bad integer list {text!r}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwork",
        description="Work distributions, one-shot work measurement, and "
        "Jarzynski free-energy estimation for driven finite systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "exact": "write the exact work distribution and its summary",
        "compare": "write coarse-grained vs filtered tables and the ancilla sweep",
        "jarzynski": "write the free-energy convergence table",
        "sample": "draw seeded work samples from the ancilla distribution",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=str, default=None, help="JSON file with defaults")
        p.add_argument("--scenario", choices=["gue", "two-level-sg", "custom"])
        p.add_argument("--n-qubits", type=int)
        p.add_argument("--m-qubits", type=int)
        p.add_argument("--e-max", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--k-grid", type=str, help="comma-separated ascending counts")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=str)
        p.add_argument("--h", type=str, help="initial Hamiltonian JSON (custom)")
        p.add_argument("--h-tilde", type=str, help="final Hamiltonian JSON (custom)")
        p.add_argument("--u", type=str, help="drive JSON or 'identity' (custom)")
        p.add_argument("--theta", type=float, help="drive rotation angle (two-level-sg)")
        p.add_argument("--omega1", type=float, help="initial splitting (two-level-sg)")
        p.add_argument("--omega2", type=float, help="final splitting (two-level-sg)")
        p.add_argument(
            "--no-figures", action="store_true", help="write only delimited output"
        )
        if name == "sample":
            p.add_argument("--k", type=int, help="number of samples to draw")
        if name == "compare":
            p.add_argument(
                "--m-sweep", type=str, help="comma-separated ancilla sizes to sweep"
            )
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config-file values, and flags (flags win)."""
    merged = dict(DEFAULTS)
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file {path} does not exist")
        loaded = json.loads(path.read_text())
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {path} must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    if getattr(args, "no_figures", False):
        merged["figures"] = False

    seed = int(merged["seed"])
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit non-negative integer, got {seed}")
    beta = float(merged["beta"])
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    k_grid = _parse_int_list(merged["k_grid"])
    if any(np.diff(k_grid) <= 0):
        raise ValueError(f"k_grid must be strictly ascending, got {k_grid}")
    k = int(merged["k"])
    if args.command == "sample" and k < 1:
        raise ValueError(f"sample count must be >= 1, got {k}")
    m_qubits = int(merged["m_qubits"])
    if merged["m_sweep"] is None:
        m_sweep = [m_qubits + i for i in range(4)]
    else:
        m_sweep = _parse_int_list(merged["m_sweep"])

    kind = str(merged["scenario"]).replace("-", "_")
    scenario = ScenarioSpec(
        kind=kind,
        e_max=float(merged["e_max"]),
        n_qubits=int(merged["n_qubits"]),
        seed=seed,
        omega1=float(merged["omega1"]),
        omega2=float(merged["omega2"]),
        theta=float(merged["theta"]),
        h_path=merged["h"],
        h_tilde_path=merged["h_tilde"],
        u_path=merged["u"] or "identity",
    )
    if kind == "custom":
        for label, p in (("--h", merged["h"]), ("--h-tilde", merged["h_tilde"])):
            if p is None:
                raise ValueError(f"custom scenario requires {label}")
            if not Path(p).exists():
                raise FileNotFoundError(f"matrix file {p} does not exist")
        if scenario.u_path != "identity" and not Path(scenario.u_path).exists():
            raise FileNotFoundError(f"matrix file {scenario.u_path} does not exist")

    return RunConfig(
        command=args.command,
        scenario=scenario,
        m_qubits=m_qubits,
        beta=beta,
        k_grid=k_grid,
        k=k,
        seed=seed,
        out=Path(merged["out"]),
        m_sweep=m_sweep,
        figures=bool(merged["figures"]),
    )


def _header(config: RunConfig, **extra) -> str:
    fields = {
        "seed": config.seed,
        "scenario": config.scenario.tag(),
        "m_qubits": config.m_qubits,
        "e_max": repr(config.scenario.e_max),
        "beta": repr(config.beta),
    }
    fields.update(extra)
    return "".join(f"# {key}: {value}\n" for key, value in fields.items())


def _write_text(path: Path, text: str) -> Path:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    return path


def _frame_csv(config: RunConfig, frame: pd.DataFrame, **extra) -> str:
    return _header(config, **extra) + frame.to_csv(index=False, lineterminator="\n")


def cmd_exact(config: RunConfig) -> list:
    protocol = build_protocol(config.scenario)
    rho, z_initial = thermal_state(protocol.h_initial, config.beta)
    dist = exact_work_distribution(protocol, rho)
    lhs, rhs, delta_f = jarzynski_exact(protocol, config.beta)
    _, z_final = thermal_state(protocol.h_final, config.beta)
    mean_w, second_w = work_moments(dist, [1, 2])

    config.out.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"w": dist.ws, "p": dist.ps})
    csv_path = _write_text(
        config.out / "work_distribution.csv", _frame_csv(config, frame)
    )
    summary = {
        "seed": config.seed,
        "scenario": config.scenario.tag(),
        "beta": config.beta,
        "support_size": dist.support_size(),
        "mean_work": mean_w,
        "second_moment": second_w,
        "z_initial": z_initial,
        "z_final": z_final,
        "exponential_work_average": lhs,
        "partition_ratio": rhs,
        "delta_f_exact": delta_f,
    }
    json_path = _write_text(
        config.out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    written = [csv_path, json_path]
    if config.figures:
        written.append(
            figures.plot_work_distribution(
                dist.ws, dist.ps, config.out / "work_distribution.png"
            )
        )
    return written


def cmd_compare(config: RunConfig) -> list:
    protocol = build_protocol(config.scenario)
    rho, _ = thermal_state(protocol.h_initial, config.beta)
    dist = exact_work_distribution(protocol, rho)

    sampler = config.sampler()
    coarse = rectangular_coarse_grain(dist, sampler)
    filtered = convolve_distribution(dist, sampler)
    table = {
        "x": np.arange(sampler.d),
        "w": work_values(sampler),
        "P_cg": coarse.values,
        "P_D_convolution": filtered.values,
    }
    if protocol.dim * sampler.d <= CIRCUIT_SIZE_LIMIT:
        table["P_D_circuit"] = simulate_circuit(protocol, rho, sampler).values
    frame = pd.DataFrame(table)

    sweep_rows = []
    for m in config.m_sweep:
        cfg_m = config.sampler(m_qubits=m)
        dist_m_cg = rectangular_coarse_grain(dist, cfg_m)
        dist_m_pd = convolve_distribution(dist, cfg_m)
        sweep_rows.append(
            {
                "m_qubits": m,
                "d": cfg_m.d,
                "supnorm": sup_norm_distance(dist_m_cg, dist_m_pd),
            }
        )
    sweep = pd.DataFrame(sweep_rows)

    config.out.mkdir(parents=True, exist_ok=True)
    written = [
        _write_text(config.out / "compare.csv", _frame_csv(config, frame)),
        _write_text(
            config.out / "supnorm_sweep.csv",
            _frame_csv(config, sweep, m_sweep=",".join(str(m) for m in config.m_sweep)),
        ),
    ]
    if config.figures:
        written.append(figures.plot_compare(frame, config.out / "compare.png"))
        written.append(figures.plot_supnorm_sweep(sweep, config.out / "supnorm_sweep.png"))
    return written


def cmd_jarzynski(config: RunConfig) -> list:
    protocol = build_protocol(config.scenario)
    rows = convergence_curve(
        protocol, config.sampler(), config.beta, config.k_grid, config.seed
    )
    frame = pd.DataFrame(
        {
            "K": [r.k for r in rows],
            "dF_exactP": [r.df_exact_p for r in rows],
            "dF_PD": [r.df_pd for r in rows],
            "stderr_exactP": [r.stderr_exact_p for r in rows],
            "stderr_PD": [r.stderr_pd for r in rows],
            "dF_true": [r.df_true for r in rows],
        }
    )
    config.out.mkdir(parents=True, exist_ok=True)
    written = [
        _write_text(
            config.out / "convergence.csv",
            _frame_csv(config, frame, k_grid=",".join(str(k) for k in config.k_grid)),
        )
    ]
    if config.figures:
        written.append(figures.plot_convergence(frame, config.out / "convergence.png"))
    return written


def cmd_sample(config: RunConfig) -> list:
    protocol = build_protocol(config.scenario)
    rho, _ = thermal_state(protocol.h_initial, config.beta)
    dist = exact_work_distribution(protocol, rho)
    coarse = convolve_distribution(dist, config.sampler())
    batch = sample(coarse, config.k, config.seed, tag=config.scenario.tag())
    config.out.mkdir(parents=True, exist_ok=True)
    written = [_write_text(config.out / "samples.csv", batch.to_csv())]
    if config.figures:
        written.append(
            figures.plot_samples(batch.samples, batch.xs, coarse, config.out / "samples.png")
        )
    return written


COMMANDS = {
    "exact": cmd_exact,
    "compare": cmd_compare,
    "jarzynski": cmd_jarzynski,
    "sample": cmd_sample,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        written = COMMANDS[args.command](config)
    except (ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"qwork: configuration error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qwork: numerical failure: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
