"""Command-line entry point.

Subcommands: ``build-ug`` (offline uniqueness graph), ``run`` (execute a
scenario), ``plot`` (render figures from a trace), ``validate-map``.
Exit codes: 0 success/converged, 1 usage error, 2 runtime error,
3 scenario ran but did not converge.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import plots, sim, uniqueness
from .config import ConfigError, load_scenario
from .models import ObsNoiseParams
from .world import MapError, load_map

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_NOT_CONVERGED = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="activeloc",
                description="Active global localization toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build-ug", help="build a uniqueness graph offline")
    b.add_argument("map", type=Path)
    b.add_argument("-n", type=int, default=400, help="number of sampled nodes")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--max-range", type=float, default=2.5,
                   help="sensor range used to simulate node observations")
    b.add_argument("--clearance", type=float, default=None,
                   help="obstacle standoff for node sampling (default: robot radius)")
    b.add_argument("--out", type=Path, required=True)

    r = sub.add_parser("run", help="run a scenario to convergence")
    r.add_argument("--config", type=Path, required=True)
    r.add_argument("--seed", type=int, default=None,
                   help="override the scenario's master seed")
    r.add_argument("--out", type=Path, default=None,
                   help="override the trace output path")

    pl = sub.add_parser("plot", help="render figures from a trace file")
    pl.add_argument("trace", type=Path)
    pl.add_argument("--map", type=Path, required=True)
    pl.add_argument("--out", type=Path, required=True, help="output directory")

    v = sub.add_parser("validate-map", help="parse a map file and check invariants")
    v.add_argument("map", type=Path)
    return p


def cmd_build_ug(args) -> int:
    env = load_map(args.map)
    p = ObsNoiseParams(max_range=args.max_range)
    g = uniqueness.build(env, args.n, np.random.default_rng(args.seed), p,
                         clearance=args.clearance)
    uniqueness.save(g, args.out)
    print(f"{len(g)} nodes, {g.n_edges} edges -> {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_scenario(args.config)
    if args.seed is not None:
        cfg.seed = int(args.seed)
    trace_path = args.out or cfg.trace_path
    t0 = time.perf_counter()
    result = sim.run_scenario(cfg)
    wall = time.perf_counter() - t0
    if trace_path is not None:
        Path(trace_path).parent.mkdir(parents=True, exist_ok=True)
        result.trace.save(trace_path)
    w_max = float(result.final_belief.weights.max())
    print(f"converged: {result.converged}")
    print(f"epochs: {result.epochs}")
    print(f"final modes: {len(result.final_belief.modes)} (max weight {w_max:.4f})")
    print(f"wall time: {wall:.1f} s")
    if trace_path is not None:
        print(f"trace: {trace_path}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_plot(args) -> int:
    trace = sim.TraceLog.load(args.trace)
    env = load_map(args.map)
    outputs = plots.render_all(trace, env, args.out)
    for path in outputs:
        print(path)
    return EXIT_OK


def cmd_validate_map(args) -> int:
    env = load_map(args.map)
    print(f"ok: {len(env.landmarks)} landmarks, {len(env.obstacles)} obstacles, "
          f"bounds {env.bounds}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    handlers = {
        "build-ug": cmd_build_ug,
        "run": cmd_run,
        "plot": cmd_plot,
        "validate-map": cmd_validate_map,
    }
    try:
        return handlers[args.command](args)
    except (MapError, ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
