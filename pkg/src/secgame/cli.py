"""Command-line entry point.

Exit codes: 0 success, 64 usage error, 65 bad input data, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from . import __version__
from .experiments import (
    PRNG_CONTRACT,
    ScenarioFormatError,
    ScenarioSpec,
    convergence_csv,
    dump_scenario,
    gen_scenario,
    load_scenario,
    run_convergence,
    run_sweep,
    sweep_csv,
)
from .game import ResourceLimitError
from .solvers import METHODS, SolverConfig, solve

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_solver_flags(p):
    p.add_argument("--budget-tol", type=_positive_float, default=1e-9,
                   help="relative budget tolerance (default 1e-9)")
    p.add_argument("--br-tol", type=_positive_float, default=1e-12,
                   help="best-response round tolerance relative to P_total")
    p.add_argument("--max-outer", type=_positive_int, default=200)


def _add_spec_flags(p):
    p.add_argument("--p-total", type=_positive_float, default=0.05,
                   help="jammer power budget in W (default 0.05)")
    p.add_argument("--p-s", type=_positive_float, default=0.01,
                   help="legitimate transmit power in W (default 0.01)")
    p.add_argument("--sigma2", type=_positive_float, default=1.0,
                   help="noise power in W (default 1.0)")
    p.add_argument("--gain-scale", type=_positive_float, default=1e4)
    p.add_argument("--nonneg-baseline", action="store_true",
                   help="enforce g_s >= g_e on every channel")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="secgame",
                     description="Game-theoretic friendly-jammer power allocation.")
    parser.add_argument("--version", action="version",
                        version=f"secgame {__version__} (prng {PRNG_CONTRACT})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    scen = sub.add_parser("scenario", help="scenario files")
    scen_sub = scen.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gen = scen_sub.add_parser("gen", help="generate a seeded scenario")
    gen.add_argument("--n", type=_positive_int, required=True)
    gen.add_argument("--seed", type=_seed, required=True)
    gen.add_argument("--out", required=True)
    _add_spec_flags(gen)

    sol = sub.add_parser("solve", help="solve one scenario, print JSON")
    sol.add_argument("--scenario", required=True)
    sol.add_argument("--method", required=True, choices=METHODS)
    sol.add_argument("--resolution", type=_positive_int, default=2000,
                     help="grid steps across the budget (grid method)")
    sol.add_argument("--step", type=_positive_float, default=1e-3,
                     help="gradient step as a fraction of P_total (pga method)")
    sol.add_argument("--iters", type=_positive_int, default=10_000)
    _add_solver_flags(sol)

    conv = sub.add_parser("converge", help="game-solver convergence series to CSV")
    conv.add_argument("--scenario", required=True)
    conv.add_argument("--out", required=True)
    _add_solver_flags(conv)

    sw = sub.add_parser("sweep", help="sum secrecy rate vs channel count to CSV")
    sw.add_argument("--n-min", type=_positive_int, required=True)
    sw.add_argument("--n-max", type=_positive_int, required=True)
    sw.add_argument("--seeds", type=_positive_int, required=True)
    sw.add_argument("--methods", required=True,
                    help="comma-separated subset of " + ",".join(METHODS))
    sw.add_argument("--out", required=True)
    sw.add_argument("--base-seed", type=_seed, default=0)
    _add_spec_flags(sw)
    _add_solver_flags(sw)
    return parser


def _write_atomic(path: str, text: str) -> None:
    if not path:
        raise UsageError("output path must be non-empty")
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".secgame-", suffix=".tmp")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _config(args, **extra) -> SolverConfig:
    return SolverConfig(budget_tol=args.budget_tol, br_tol=args.br_tol,
                        max_outer=args.max_outer, **extra)


def _spec(args, n, seed) -> ScenarioSpec:
    return ScenarioSpec(n_channels=n, seed=seed, p_total_w=args.p_total,
                        p_s_w=args.p_s, sigma2_w=args.sigma2,
                        gain_scale=args.gain_scale,
                        nonneg_baseline=args.nonneg_baseline)


def cmd_scenario_gen(args) -> int:
    spec = _spec(args, args.n, args.seed)
    _write_atomic(args.out, dump_scenario(gen_scenario(spec), spec))
    return EXIT_OK


def cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.method == "grid" and scenario.n_channels > 3:
        raise UsageError(f"grid method supports at most 3 channels, "
                         f"scenario has {scenario.n_channels}")
    cfg = _config(args, grid_resolution=args.resolution, pga_step=args.step,
                  pga_iters=args.iters)
    res = solve(scenario, args.method, cfg)
    sys.stdout.write(json.dumps(res.to_dict(), indent=2) + "\n")
    return EXIT_OK


def cmd_converge(args) -> int:
    scenario = load_scenario(args.scenario)
    _write_atomic(args.out, convergence_csv(run_convergence(scenario, _config(args))))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.n_max < args.n_min:
        raise UsageError("--n-max must be >= --n-min")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise UsageError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
    table = run_sweep(range(args.n_min, args.n_max + 1), args.seeds,
                      _spec(args, args.n_min, args.base_seed), methods, _config(args))
    for note in table.notes:
        print(f"note: {note}", file=sys.stderr)
    _write_atomic(args.out, sweep_csv(table))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": cmd_solve,
        "converge": cmd_converge,
        "sweep": cmd_sweep,
        "scenario": cmd_scenario_gen,
    }
    try:
        return handlers[args.command](args)
    except (UsageError, ResourceLimitError) as exc:
        print(f"secgame: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioFormatError as exc:
        print(f"secgame: bad scenario: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"secgame: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
