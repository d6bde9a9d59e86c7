"""Command-line front end.

Exit status is 0 on success (certified equilibrium, converged flow, oracle
hit), 1 when nothing was certified or found, and 2 on input errors.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .ana import AnaSettings, IntegrationFault, run_to_critical
from .io import (
    dump_document,
    load_game,
    load_profile,
    profile_blocks,
    result_document,
    trace_table,
    write_trace,
    write_traces,
)
from .oracle import (
    certify,
    enumerate_pure_ne,
    grid_regret_scan,
    two_player_support_enumeration,
)
from .swarm import SwarmSettings, run_acna

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

logger = logging.getLogger("nashflow")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_ana_options(p):
    g = p.add_argument_group("flow integration")
    g.add_argument("--step-size", type=float, default=1e-3)
    g.add_argument("--max-steps", type=int, default=2_000_000)
    g.add_argument("--stationarity-tol", type=float, default=1e-6)
    g.add_argument("--stationarity-window", type=int, default=10)
    g.add_argument("--feasibility-tol", type=float, default=1e-10)
    g.add_argument("--nu", type=float, default=0.0)
    g.add_argument("--trace-stride", type=int, default=100)


def _ana_settings(args):
    return AnaSettings(
        step_size=args.step_size,
        max_steps=args.max_steps,
        stationarity_tol=args.stationarity_tol,
        stationarity_window=args.stationarity_window,
        feasibility_tol=args.feasibility_tol,
        nu=args.nu,
        trace_stride=args.trace_stride,
    )


def build_parser():
    parser = _Parser(prog="nashflow", description="Nash equilibria of normal-form games.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the swarm of neurodynamic flows")
    p.add_argument("game")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--result", help="write the result document here (default: stdout)")
    p.add_argument("--trace-dir", help="write one trace CSV per particle into this directory")
    g = p.add_argument_group("swarm")
    g.add_argument("--swarm-size", type=int, default=10)
    g.add_argument("--c1", type=float, default=2.0)
    g.add_argument("--c2", type=float, default=2.0)
    g.add_argument("--stall-tol", type=float, default=0.1)
    g.add_argument("--stall-limit", type=int, default=100)
    g.add_argument("--max-iter", type=int, default=500)
    g.add_argument("--global-tol", type=float, default=1e-12)
    g.add_argument("--init-range", type=float, nargs=2, default=(-10.0, 10.0),
                   metavar=("LOW", "HIGH"))
    g.add_argument("--velocity-source", choices=("critical", "start"), default="critical")
    _add_ana_options(p)

    p = sub.add_parser("verify", help="certify a candidate profile")
    p.add_argument("game")
    p.add_argument("profile")
    p.add_argument("--tol-regret", type=float, default=1e-6)
    p.add_argument("--tol-feas", type=float, default=1e-8)

    p = sub.add_parser("oracle", help="exact or brute-force equilibria for small games")
    p.add_argument("game")
    p.add_argument("--mode", choices=("pure", "support2", "grid"), required=True)
    p.add_argument("--resolution", type=int, default=3)

    p = sub.add_parser("ana", help="integrate a single flow to a critical point")
    p.add_argument("game")
    start = p.add_mutually_exclusive_group(required=True)
    start.add_argument("--seed", type=int, help="draw x0 uniformly from the init range")
    start.add_argument("--x0", help="profile file with the starting point")
    p.add_argument("--init-range", type=float, nargs=2, default=(-10.0, 10.0),
                   metavar=("LOW", "HIGH"))
    p.add_argument("--trace", help="write the trace CSV here")
    _add_ana_options(p)
    return parser


def _emit(doc, path=None):
    text = dump_document(doc)
    if path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args):
    game = load_game(args.game)
    swarm = SwarmSettings(
        swarm_size=args.swarm_size,
        c1=args.c1,
        c2=args.c2,
        stall_tol=args.stall_tol,
        stall_limit=args.stall_limit,
        max_iter=args.max_iter,
        global_tol=args.global_tol,
        init_range=tuple(args.init_range),
        seed=args.seed,
        velocity_source=args.velocity_source,
    )
    ana = _ana_settings(args)

    def progress(k, value, stall):
        logger.info("iteration %d: best objective %.3e, stall %d", k, value, stall)

    result = run_acna(game, swarm, ana, keep_traces=bool(args.trace_dir), callback=progress)
    settings = {"swarm": dataclasses.asdict(swarm), "flow": dataclasses.asdict(ana)}
    settings["swarm"]["init_range"] = list(swarm.init_range)
    doc = result_document(game, result, seed=args.seed, settings=settings)
    _emit(doc, args.result)
    if args.trace_dir:
        write_traces(args.trace_dir, result.traces, game.num_strategies,
                     ana.trace_stride, ana.step_size)
    cert = result.certificate
    print(
        f"verdict={cert.verdict} objective={cert.objective:.3e} "
        f"iterations={result.n_iter} faults={result.n_faults}",
        file=sys.stderr,
    )
    return EXIT_OK if cert.verdict else EXIT_FAIL


def cmd_verify(args):
    game = load_game(args.game)
    x = load_profile(args.profile, game)
    cert = certify(game, x, tol_regret=args.tol_regret, tol_feas=args.tol_feas)
    _emit({"certificate": cert.to_dict(game)})
    return EXIT_OK if cert.verdict else EXIT_FAIL


def cmd_oracle(args):
    game = load_game(args.game)
    if args.mode == "pure":
        found = [
            np.concatenate([np.eye(m)[j] for m, j in zip(game.strategy_counts, s)])
            for s in enumerate_pure_ne(game)
        ]
    elif args.mode == "support2":
        found = [np.concatenate(pair) for pair in two_player_support_enumeration(game)]
    else:
        value, x = grid_regret_scan(game, args.resolution)
        doc = {
            "mode": "grid",
            "resolution": args.resolution,
            "objective": value,
            "strategies": profile_blocks(game, x),
            "certificate": certify(game, x).to_dict(game),
        }
        _emit(doc)
        return EXIT_OK if value <= 1e-12 else EXIT_FAIL
    doc = {
        "mode": args.mode,
        "equilibria": [certify(game, x).to_dict(game) for x in found],
    }
    _emit(doc)
    if not found:
        print(f"no {'pure ' if args.mode == 'pure' else ''}NE found", file=sys.stderr)
    return EXIT_OK if found else EXIT_FAIL


def cmd_ana(args):
    game = load_game(args.game)
    if args.x0:
        x0 = load_profile(args.x0, game)
    else:
        lo, hi = args.init_range
        x0 = np.random.default_rng(args.seed).uniform(lo, hi, game.num_strategies)
    settings = _ana_settings(args)
    try:
        result = run_to_critical(game, x0, settings)
    except IntegrationFault as exc:
        print(f"integration fault: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.trace:
        write_trace(args.trace, trace_table([result.trace], settings.step_size),
                    game.num_strategies, settings.trace_stride, settings.step_size)
    doc = {
        "converged": result.converged,
        "steps": result.steps,
        "entry_time": result.trace.entry_time,
        "theta": result.zeta,
        "x0": x0.tolist(),
        "certificate": certify(game, result.x).to_dict(game),
    }
    _emit(doc)
    return EXIT_OK if result.converged else EXIT_FAIL


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "oracle": cmd_oracle, "ana": cmd_ana}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        # GameFileError, OracleSizeError, settings and shape checks
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
