"""Command line front end.

Subcommands: groundstate, evolve, classify, experiment, check-conditions.
Each takes --config <toml>; outputs land in the config's outdir and a single
JSON summary line goes to stdout.  Exit codes: 0 success, 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import evolve as evolve_mod
from . import groundstate, lab, nonlin
from .evolve import write_diagnostics_csv
from .grid import build_grid, write_field_csv
from .groundstate import GroundStateError
from .lab import ConfigError, ExperimentConfig, load_config
from .nonlin import SaturationError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _emit(summary: dict) -> None:
    print(json.dumps(summary, default=float))


def cmd_groundstate(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    result = groundstate.ground_state(cfg.spec(), grid)
    os.makedirs(cfg.outdir, exist_ok=True)
    files = groundstate.write_outputs(result, cfg.spec(), cfg.outdir)
    return {"kind": "groundstate", "a_star": result.a_star, "m": result.m,
            "residual": result.residual,
            "instability_index": result.instability_index,
            "pohozaev_max": max(abs(v) for v in result.pohozaev.values()),
            "files": files}


def cmd_evolve(cfg: ExperimentConfig) -> dict:
    grid = build_grid(cfg.N, cfg.R)
    spec = cfg.spec()
    os.makedirs(cfg.outdir, exist_ok=True)
    u0, _ = lab.build_initial(cfg, grid, spec, os.path.join(cfg.outdir, "cache"))
    snap_idx = [0]

    def snapshot_sink(state):
        path = os.path.join(cfg.outdir, f"snapshot_{snap_idx[0]}.csv")
        write_field_csv(path, grid, state.field, t=state.t,
                        header_extra=f" spec={spec.label()}")
        snap_idx[0] += 1

    result = evolve_mod.evolve(u0, spec, cfg.evolve_params(),
                               snapshot_sink=snapshot_sink if cfg.snapshot_stride else None)
    diag = os.path.join(cfg.outdir, "diagnostics.csv")
    write_diagnostics_csv(diag, result["records"],
                          header_extra=f" spec={spec.label()}")
    rec = result["records"][-1]
    return {"kind": "evolve", "status": result["status"],
            "t_final": rec.t, "t_blow": result["t_blow"],
            "mass_drift": abs(rec.mass / result["records"][0].mass - 1.0),
            "snapshots": snap_idx[0], "files": {"diagnostics": diag}}


def cmd_check_conditions(cfg: ExperimentConfig) -> dict:
    report = nonlin.check_conditions(cfg.spec())
    os.makedirs(cfg.outdir, exist_ok=True)
    path = os.path.join(cfg.outdir, "conditions.json")
    with open(path, "w") as f:
        json.dump(report.as_dict(), f, indent=1)
    out = report.as_dict()
    out.pop("violation_points")
    out["kind"] = "check-conditions"
    out["n_violations"] = len(report.violation_points)
    out["files"] = {"conditions": path}
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="trapnls",
        description="Radial trapped-NLS lab: ground states, evolution, experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("groundstate", "evolve", "classify", "experiment", "check-conditions"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="flat TOML config file")
        if name == "experiment":
            sp.add_argument("--render", action="store_true",
                            help="also render figures (requires plotkit)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "groundstate":
            summary = cmd_groundstate(cfg)
        elif args.command == "evolve":
            summary = cmd_evolve(cfg)
        elif args.command == "classify":
            summary = lab.run_experiment(
                lab.ExperimentConfig(**{**cfg.__dict__, "kind": "Classify"}))
        elif args.command == "check-conditions":
            summary = cmd_check_conditions(cfg)
        else:
            if getattr(args, "render", False):
                cfg.render = True
            summary = lab.run_experiment(cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (GroundStateError, SaturationError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL

    _emit(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
