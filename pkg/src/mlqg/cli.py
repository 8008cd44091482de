"""Command line front end.

Subcommands:
  run <config> [--out DIR]   run a simulation, write CSV output
  verify <suite>             run a numerical check suite
  convergence <case>         print a grid refinement error table
  dump-config <config>       echo a config file in canonical form

Exit codes: 0 success, 1 bad usage or bad config, 2 numerical failure.
All output is deterministic for a given config and package version, so
reruns can be compared byte for byte.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, dump_config, parse_config
from .sim import PicardConvergenceError, SimulationAbort, run
from .verify import SUITES, convergence_table, run_suite


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for numerical
    # failures, so remap usage problems to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fmt(x):
    return f"{x:.16e}"


def _layer_cols(name, n_layers):
    return [f"{name}_{i}" for i in range(n_layers)]


def write_diagnostics(path, traj):
    n = traj.stack.n_layers
    header = (
        ["time"]
        + _layer_cols("energy", n)
        + _layer_cols("enstrophy", n)
        + _layer_cols("pv_min", n)
        + _layer_cols("pv_max", n)
        + _layer_cols("pv_inf", n)
        + _layer_cols("circulation", n)
        + _layer_cols("mass", n)
        + _layer_cols("boundary_l", n)
        + ["total_energy", "coupling_energy"]
        + _layer_cols("modal_energy", n)
    )
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for rec in traj.records:
            vals = np.concatenate(
                [
                    [rec.time],
                    rec.energy,
                    rec.enstrophy,
                    rec.pv_min,
                    rec.pv_max,
                    rec.pv_inf,
                    rec.circulation,
                    rec.mass,
                    rec.boundary,
                    [rec.total_energy, rec.coupling_energy],
                    rec.modal_energy,
                ]
            )
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


def write_snapshot(path, state):
    grid = state.psi.grid
    psi, q = state.psi.data, state.q.data
    with open(path, "w") as fh:
        fh.write("layer,ir,itheta,r,theta,psi,q\n")
        for i in range(psi.shape[0]):
            for j in range(grid.n_r):
                r_s = _fmt(grid.r[j])
                for k in range(grid.n_theta):
                    fh.write(
                        f"{i},{j},{k},{r_s},{_fmt(grid.theta[k])},"
                        f"{_fmt(psi[i, j, k])},{_fmt(q[i, j, k])}\n"
                    )


def write_manifest(path, config, traj):
    grid = traj.grid
    with open(path, "w") as fh:
        fh.write(f"mlqg {__version__}\n")
        fh.write(f"grid n_r={grid.n_r} n_theta={grid.n_theta} dr={_fmt(grid.dr)}\n")
        fh.write(f"final_time {_fmt(traj.records[-1].time)}\n")
        fh.write(f"diagnostics_rows {len(traj.records)}\n")
        fh.write(f"snapshots {len(traj.states)}\n")
        fh.write("\n")
        fh.write(dump_config(config))


def cmd_run(args):
    try:
        with open(args.config) as fh:
            config = parse_config(fh.read())
        if args.out is not None:
            config.directory = args.out
            config.validate()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        traj = run(config)
    except (SimulationAbort, PicardConvergenceError, ValueError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2

    outdir = config.directory
    os.makedirs(outdir, exist_ok=True)
    write_diagnostics(os.path.join(outdir, "diagnostics.csv"), traj)
    if config.snapshot_every > 0:
        for step, state in traj.states:
            write_snapshot(os.path.join(outdir, f"snapshot_{step:06d}.csv"), state)
    write_manifest(os.path.join(outdir, "manifest.txt"), config, traj)
    print(f"wrote {outdir}: {len(traj.records)} diagnostics rows, "
          f"final time {traj.records[-1].time:.6g}")
    return 0


def cmd_verify(args):
    try:
        results = run_suite(args.suite)
    except (SimulationAbort, PicardConvergenceError) as exc:
        print(f"verify aborted: {exc}", file=sys.stderr)
        return 2
    for res in results:
        print(res.line())
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} checks passed")
    return 0 if n_pass == len(results) else 2


def cmd_convergence(args):
    lines, ok = convergence_table(args.case)
    for line in lines:
        print(line)
    return 0 if ok else 2


def cmd_dump_config(args):
    try:
        with open(args.config) as fh:
            config = parse_config(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(dump_config(config))
    return 0


def build_parser():
    parser = _Parser(
        prog="mlqg",
        description="Layered quasi-geostrophic flow on the unit disk.",
    )
    parser.add_argument("--version", action="version", version=f"mlqg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("config", help="path to config file")
    p_run.add_argument("--out", default=None, help="override the output directory")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run a numerical check suite")
    p_verify.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p_verify.set_defaults(func=cmd_verify)

    p_conv = sub.add_parser("convergence", help="print a refinement error table")
    p_conv.add_argument("case", choices=["elliptic", "advection", "full"])
    p_conv.set_defaults(func=cmd_convergence)

    p_dump = sub.add_parser("dump-config", help="echo a config in canonical form")
    p_dump.add_argument("config", help="path to config file")
    p_dump.set_defaults(func=cmd_dump_config)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
