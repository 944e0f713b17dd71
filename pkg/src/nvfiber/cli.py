"""Command-line interface: dark-state inspection, protocol runs, sweeps.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
failure (norm or trace drift). Summaries go to stdout, diagnostics to
stderr. ``--set dotted.path=value`` overrides config fields after loading,
so a JSON document stays the single source of truth.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .dynamics import IntegrationError
from .hilbert import BasisError, build_basis
from .model import ModelKind, dark_state, default_basis_spec, effective_hamiltonian
from .pulses import site_pulses
from .sweeps import (
    ConfigError,
    SweepSpec,
    apply_param,
    figure_preset,
    read_config,
    run_point,
    run_sweep,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvfiber",
        description="Simulator for adiabatic W-state preparation and phase-covariant "
                    "cloning in a fiber-coupled cavity network.",
    )
    parser.add_argument("--version", action="version", version=f"nvfiber {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
        p.add_argument("--config", required=config_required, help="JSON config path")
        p.add_argument("--out", help="output file path (overrides output.path)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="PATH=VALUE", help="override a config field (repeatable)")
        p.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
        p.add_argument("--model", choices=["full", "effective"],
                       help="override the model kind")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("dark-state", help="print the instantaneous dark state")
    common(p)
    p.add_argument("--time", type=float, default=0.0, metavar="GT",
                   help="evaluation time in units of 1/g")

    p = sub.add_parser("prepare-w", help="run the W-state preparation protocol")
    common(p)

    p = sub.add_parser("clone", help="run the phase-covariant cloning protocol")
    common(p)
    p.add_argument("--delta-phase", type=float, default=None, metavar="RAD",
                   help="input qubit phase (overrides clone.delta_phase)")

    p = sub.add_parser("sweep", help="run the sweep described by the config")
    common(p)

    p = sub.add_parser("figure", help="run a preset figure experiment")
    p.add_argument("figure_id", metavar="ID", help="one of 3a 3b 3c 4 5 6 7")
    common(p, config_required=False)
    return parser


def _apply_overrides(spec: SweepSpec, args: argparse.Namespace) -> SweepSpec:
    config = spec.config
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like dotted.path=value")
        path, raw = item.split("=", 1)
        config = apply_param(config, path.strip(), raw.strip())
        if args.verbose:
            print(f"override {path.strip()} = {raw.strip()}", file=sys.stderr)
    if args.model:
        config = replace(config, model=ModelKind(args.model))
    if getattr(args, "delta_phase", None) is not None:
        config = replace(config, clone_delta=args.delta_phase)
    spec = replace(spec, config=config)
    if args.out:
        spec = replace(spec, output=args.out)
    return spec


def _summary(label: str, fidelity: float, dimension: int, wall: float) -> None:
    print(f"{label}: fidelity={fidelity:.6f} basis_dimension={dimension} "
          f"wall_time={wall:.2f}s")


def _run_protocol(spec: SweepSpec, protocol: str) -> None:
    config = replace(spec.config, protocol=protocol)
    started = time.perf_counter()
    result = run_point(config)
    wall = time.perf_counter() - started
    dim = result.trajectory.final_state.basis.dimension
    _summary(config.protocol, result.final_fidelity, dim, wall)
    if result.per_copy_fidelities is not None:
        copies = " ".join(f"{f:.6f}" for f in result.per_copy_fidelities)
        print(f"per_copy_fidelities: {copies}")
    if spec.output:
        traj = result.trajectory
        lines = ["gt,fidelity"]
        for t, f in zip(traj.times, traj.observables["fidelity"]):
            lines.append(f"{t:.12g},{f:.12g}")
        with open(spec.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"trajectory written to {spec.output}")


def _run_dark_state(spec: SweepSpec, gt: float) -> None:
    params = spec.config.system
    pulses = site_pulses(spec.config.pulses, params.n_sites)
    basis = build_basis(default_basis_spec(params, ModelKind.EFFECTIVE))
    state = dark_state(params, pulses, basis, gt)
    hgen = effective_hamiltonian(params, pulses, basis)
    residual = float(np.linalg.norm(hgen.matvec(gt, state.amplitudes)))
    print(f"dark state at gt={gt:g} (basis dimension {basis.dimension}):")
    for i, amp in enumerate(state.amplitudes):
        if abs(amp) > 1e-12:
            print(f"  {basis.label(i)}  {amp.real:+.6e}{amp.imag:+.6e}j")
    print(f"null residual |H(t) psi| = {residual:.3e}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "figure":
            spec = figure_preset(args.figure_id)
        else:
            spec = read_config(args.config)
        spec = _apply_overrides(spec, args)

        if args.command == "dark-state":
            _run_dark_state(spec, args.time)
        elif args.command == "prepare-w":
            _run_protocol(spec, "prepare_w")
        elif args.command == "clone":
            _run_protocol(spec, "clone")
        elif args.command in ("sweep", "figure"):
            if spec.param is None and spec.observable != "time_series":
                raise ConfigError("sweep", "config has no sweep section; "
                                           "use prepare-w/clone for single runs")
            started = time.perf_counter()
            result = run_sweep(spec, workers=args.workers)
            wall = time.perf_counter() - started
            finite = [r.fidelity for r in result.rows if not np.isnan(r.fidelity)]
            failed = sum(1 for r in result.rows if r.error)
            best = max(finite) if finite else float("nan")
            print(f"sweep: rows={len(result.rows)} failed={failed} "
                  f"max_fidelity={best:.6f} "
                  f"basis_dimension={result.meta['basis_dimension']} "
                  f"wall_time={wall:.2f}s")
            if spec.output:
                print(f"results written to {spec.output}")
        return 0
    except (ConfigError, BasisError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
