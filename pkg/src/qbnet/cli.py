"""Command-line experiment runner.

Subcommands:
  steady-state   steady energies/ergotropies of a configured network
  dynamics       trajectory CSV of per-mode energies
  sweep          tabulate an observable against a swept parameter
  parity-scan    eigenmode decomposition of reciprocal-chain response
  ergotropy      squeezing enhancement factor over a grid of r
  reproduce      regenerate one figure's data files

Exit codes: 0 success, 2 validation/configuration error, 3 engine error
outside sweep mode (sweeps record per-row errors instead of aborting).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import energetics, figures, fock, gaussian, network, spectral, sweeps
from .errors import ConfigError, PlanError, QbnetError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ENGINE = 3


def _parse_bath(text: str) -> gaussian.ReservoirSpec:
    parts = text.split(":")
    kind = parts[0].lower()
    try:
        if kind == "vacuum":
            return gaussian.ReservoirSpec.vacuum()
        if kind == "thermal":
            return gaussian.ReservoirSpec.thermal(float(parts[1]))
        if kind == "squeezed":
            theta = float(parts[2]) if len(parts) > 2 else 0.0
            return gaussian.ReservoirSpec.squeezed(float(parts[1]), theta)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"cannot parse bath {text!r}: {exc}") from exc
    raise ConfigError(f"unknown bath kind {parts[0]!r}")


def _parse_engines(text: str) -> tuple[sweeps.Engine, ...]:
    out = []
    for name in text.split(","):
        name = name.strip().lower()
        try:
            out.append(sweeps.Engine(name))
        except ValueError as exc:
            raise ConfigError(f"unknown engine {name!r}") from exc
    return tuple(out)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fock_steady_report(spec, bath, levels):
    sim = fock.FockSimulator(spec, bath, fock.FockConfig(levels=levels))
    state = sim.steady_state()
    energies = sim.occupations(state.data) * spec.omega
    ergos = np.array([
        fock.spectral_ergotropy(sim.reduced(state.data, m), spec.omega)
        for m in range(spec.n_modes)
    ])
    return energetics.EnergyReport(
        energies=energies, ergotropies=ergos, passives=energies - ergos,
        engine="fock", time=math.inf, omega=spec.omega)


def _cmd_steady_state(args) -> int:
    spec = network.load_spec(args.config)
    bath = _parse_bath(args.bath)
    out = _out_dir(args)
    state = gaussian.steady_state(gaussian.assemble(spec, bath))
    report = energetics.report_from_state(state, spec.omega)
    sweeps.write_steady_json(out / "steady_state.json", spec, bath, report)
    if args.verify == "fock":
        fock_report = _fock_steady_report(spec, bath, args.fock_levels)
        sweeps.write_steady_json(out / "steady_state_fock.json", spec, bath, fock_report)
        gap = np.max(np.abs(fock_report.energies - report.energies))
        print(f"fock cross-check: max energy gap {gap:.3e}")
    print(f"wrote {out / 'steady_state.json'}")
    return EXIT_OK


def _cmd_dynamics(args) -> int:
    spec = network.load_spec(args.config)
    bath = _parse_bath(args.bath)
    out = _out_dir(args)
    times = np.linspace(args.t_max / args.points, args.t_max, args.points)
    sys = gaussian.assemble(spec, bath)
    states = gaussian.evolve(sys, gaussian.GaussianState.ground(spec.n_modes), times)
    reports = [energetics.report_from_state(s, spec.omega) for s in states]
    sweeps.write_trajectory_csv(out / "trajectory.csv", spec, times, reports)
    if args.verify == "fock":
        sim = fock.FockSimulator(spec, bath, fock.FockConfig(levels=args.fock_levels))
        probe = times[len(times) // 2]
        state = sim.evolve([probe])[-1]
        gap = np.max(np.abs(sim.occupations(state.data) * spec.omega
                            - reports[len(times) // 2].energies))
        print(f"fock cross-check at t={probe:g}: max energy gap {gap:.3e}")
    print(f"wrote {out / 'trajectory.csv'}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = network.load_spec(args.config)
    bath = _parse_bath(args.bath)
    grid = np.array([float(x) for x in args.grid.split(",")])
    plan = sweeps.SweepPlan(
        base=spec,
        bath=bath,
        axis=sweeps.SweepAxis(args.axis),
        grid=grid,
        observables=tuple(sweeps.Observable(o.strip()) for o in args.observables.split(",")),
        engines=_parse_engines(args.engines),
        fock_levels=args.fock_levels,
    )
    result = sweeps.run(plan, workers=args.workers)
    out = _out_dir(args)
    result.to_csv(out / "sweep.csv")
    result.to_meta_json(out / "sweep.meta.json")
    n_err = sum(1 for r in result.rows if r["error"])
    print(f"wrote {out / 'sweep.csv'} ({len(result.rows)} rows, {n_err} errors)")
    return EXIT_OK


def _cmd_parity_scan(args) -> int:
    out = _out_dir(args)
    reports = [
        spectral.parity_report(n, args.j, args.kappa, args.epsilon).to_dict()
        for n in range(args.n_min, args.n_max + 1)
    ]
    path = out / "parity_scan.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(reports, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_ergotropy(args) -> int:
    spec = network.load_spec(args.config)
    out = _out_dir(args)
    rows = []
    for r in np.linspace(args.r_min, args.r_max, args.r_points):
        factor = energetics.enhancement_factor(
            spec, gaussian.ReservoirSpec.squeezed(float(r), args.theta_r))
        rows.append((float(r), factor))
    path = out / "enhancement.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r,enhancement_factor\n")
        for r, factor in rows:
            fh.write(f"{r:.12g},{factor:.12g}\n")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    paths = figures.reproduce(args.figure, args.out)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbnet",
        description="Energy transport and ergotropy in driven quantum battery networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="network JSON config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--bath", default="vacuum",
                       help="vacuum | thermal:<n_th> | squeezed:<r>[:<theta>]")
        p.add_argument("--verify", choices=["fock"], default=None,
                       help="cross-check against the Fock oracle")
        p.add_argument("--fock-levels", type=int, default=8,
                       help="Fock levels per mode for --verify/fock engine")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("steady-state", help="steady energies and ergotropies")
    common(p)
    p.set_defaults(func=_cmd_steady_state)

    p = sub.add_parser("dynamics", help="per-mode energy trajectory CSV")
    common(p)
    p.add_argument("--t-max", type=float, default=5000.0)
    p.add_argument("--points", type=int, default=200)
    p.set_defaults(func=_cmd_dynamics)

    p = sub.add_parser("sweep", help="observable vs swept parameter")
    common(p)
    p.add_argument("--axis", required=True,
                   choices=[a.value for a in sweeps.SweepAxis])
    p.add_argument("--grid", required=True, help="comma-separated grid values")
    p.add_argument("--observables", default="energy",
                   help="comma list of energy,ergotropy,relax_time,parity")
    p.add_argument("--engines", default="gaussian",
                   help="comma list of closed-form,gaussian,spectral,fock")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("parity-scan", help="chain eigenmode parity reports")
    p.add_argument("--out", default=".")
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--j", type=float, required=True, help="hopping strength")
    p.add_argument("--kappa", type=float, default=0.003)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.set_defaults(func=_cmd_parity_scan)

    p = sub.add_parser("ergotropy", help="squeezing enhancement factor vs r")
    common(p)
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=1.2)
    p.add_argument("--r-points", type=int, default=10)
    p.add_argument("--theta-r", type=float, default=0.0)
    p.set_defaults(func=_cmd_ergotropy)

    p = sub.add_parser("reproduce", help="regenerate a figure's data files")
    p.add_argument("figure", choices=list(figures.FIGURE_IDS))
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, PlanError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except QbnetError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
