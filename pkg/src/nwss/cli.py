"""Command-line interface: ``nwss {capacity,bound,sweep,eigen,verify}``.

Exit codes: 0 success, 1 invalid input, 2 failed verification,
3 closed-form budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import capacity_closed as cc
from .capacity_mc import mc_capacity, mc_jensen, mmse_sum_rate
from .channel import build_bundle
from .errors import BudgetExceededError, ConfigError
from .experiments import (DEFAULT_TRIALS, SWEEP_METHODS, SweepSpec, emit_eigen, load_document,
                          parse_list, rows_to_csv, run_sweep)
from .verify import run_verify

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_BUDGET = 0, 1, 2, 3


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation errors; 2 is reserved for verification
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nwss", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--workers", type=_positive_int, default=1, help="worker threads")

    sp = sub.add_parser("capacity", help="Monte Carlo capacity estimates")
    common(sp)
    sp.add_argument("--trials", type=_positive_int, default=DEFAULT_TRIALS)
    sp.add_argument("--seed", type=_nonneg_int, default=0)
    sp.add_argument("--methods", default="mc_capacity,mc_jensen,mmse_rate")

    sp = sub.add_parser("bound", help="closed-form upper bound")
    common(sp)
    sp.add_argument("--budget", type=_nonneg_int, default=cc.DEFAULT_BUDGET)
    sp.add_argument("--high-snr", action="store_true", help="also print the high-SNR term")

    sp = sub.add_parser("sweep", help="parameter sweep to CSV")
    common(sp)
    sp.add_argument("--param")
    sp.add_argument("--grid", help="comma list of grid values")
    sp.add_argument("--methods", help="comma list from: " + ",".join(SWEEP_METHODS))
    sp.add_argument("--trials", type=_positive_int)
    sp.add_argument("--seed", type=_nonneg_int)
    sp.add_argument("--budget", type=_nonneg_int)
    sp.add_argument("--out", help="CSV path (default: stdout)")
    sp.add_argument("--no-timing", action="store_true", help="leave wall_time_ms empty")

    sp = sub.add_parser("eigen", help="receiver-correlation eigenvalues to CSV")
    common(sp)
    sp.add_argument("--out", help="CSV path (default: stdout)")

    sp = sub.add_parser("verify", help="run the acceptance checks")
    common(sp, config=False)
    sp.add_argument("--level", choices=("fast", "full"), default="fast")
    return p


_MC = {"mc_capacity": mc_capacity, "mc_jensen": mc_jensen, "mmse_rate": mmse_sum_rate}


def cmd_capacity(args):
    cfg, _ = load_document(args.config)
    bundle = build_bundle(cfg)
    methods = parse_list(args.methods)
    bad = [m for m in methods if m not in _MC]
    if bad or not methods:
        raise ConfigError(f"capacity methods must come from {', '.join(_MC)}")
    out = {}
    for m in methods:
        r = _MC[m](cfg, bundle, args.trials, args.seed, workers=args.workers)
        out[m] = {"value_bits": r.value, "std_error": r.std_error, "trials": r.trials}
    print(json.dumps(out, indent=2))


def cmd_bound(args):
    cfg, _ = load_document(args.config)
    bundle = build_bundle(cfg)
    out = {"closed_form": cc.closed_form_bound(cfg, bundle, args.budget).value}
    if args.high_snr:
        out["high_snr"] = cc.high_snr_bound(cfg, bundle).value
    print(json.dumps(out, indent=2))


def cmd_sweep(args):
    cfg, block = load_document(args.config)
    block = block or {}

    def pick(flag, key, default=None):
        return flag if flag is not None else block.get(key, default)

    param = pick(args.param, "param")
    if param is None:
        raise ConfigError("sweep needs --param or a 'param' entry in the sweep block")
    grid = parse_list(args.grid, float) if args.grid is not None else block.get("grid", [])
    methods = parse_list(args.methods) if args.methods is not None else block.get("methods")
    if not methods:
        raise ConfigError("sweep needs --methods or a 'methods' entry in the sweep block")
    spec = SweepSpec(cfg, param, tuple(grid), tuple(methods),
                     trials=pick(args.trials, "trials", DEFAULT_TRIALS),
                     seed=pick(args.seed, "seed", 0),
                     budget=pick(args.budget, "budget", cc.DEFAULT_BUDGET))
    rows = run_sweep(spec, args.out, workers=args.workers, timing=not args.no_timing)
    if args.out is None:
        sys.stdout.write(rows_to_csv(rows))


def cmd_eigen(args):
    cfg, _ = load_document(args.config)
    eigs = emit_eigen(cfg, args.out)
    if args.out is None:
        print("index,eigenvalue")
        for i, e in enumerate(eigs, 1):
            print(f"{i},{e:.17g}")


def cmd_verify(args):
    report = run_verify(args.level, workers=args.workers)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_VERIFY


COMMANDS = {"capacity": cmd_capacity, "bound": cmd_bound, "sweep": cmd_sweep,
            "eigen": cmd_eigen, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args) or EXIT_OK
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
