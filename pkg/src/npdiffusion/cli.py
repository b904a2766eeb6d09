"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 a statistical check
failed, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import concentration as lab
from .config import default_config, dump_config, load_config, parse_config
from .errors import ConfigInvalid, IOFailure, NPDiffusionError
from .metrics import write_lab_csv
from .network import Phenomenon

OUT_ENV = "NPDIFFUSION_OUT"
EXIT_OK, EXIT_USAGE, EXIT_STAT, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: {message} (see {self.prog} -h)", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def binomial_threshold(delta: float, replications: int) -> float:
    """Allowed violation rate: ``delta`` plus three binomial standard errors."""
    return delta + 3.0 * math.sqrt(delta * (1.0 - delta) / replications)


def uniform_design(n: int, lo: float, hi: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1_000,)))
    return rng.uniform(lo, hi, size=n)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="npdiffusion", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a scenario and write CSV outputs")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=os.environ.get(OUT_ENV, "runs/latest"),
                   help=f"output directory (default: ${OUT_ENV} or runs/latest)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--message-log", action="store_true", help="also write messages.jsonl")

    c = sub.add_parser("coverage-test", help="Monte-Carlo coverage of the local bound")
    c.add_argument("--x", type=float, default=5.0)
    c.add_argument("--n-design", type=int, default=200)
    c.add_argument("--design-range", type=float, nargs=2, default=(4.0, 6.0))
    c.add_argument("--h", type=float, default=0.5)
    c.add_argument("--optimal-h", type=float, nargs=2, metavar=("H_MIN", "H_MAX"), default=None,
                   help="use the bound-minimising bandwidth in this range instead of --h")
    c.add_argument("--sigma", type=float, default=0.3)
    c.add_argument("--delta", type=float, default=0.05)
    c.add_argument("--lipschitz", type=float, default=1.0)
    c.add_argument("--reps", type=int, default=5000)
    c.add_argument("--seed", type=int, default=7)
    c.add_argument("--noise", choices=("gaussian", "uniform"), default="gaussian")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--csv", default=None)

    n = sub.add_parser("selfnorm-test", help="Monte-Carlo check of the self-normalised bound")
    n.add_argument("--t", type=int, default=100)
    n.add_argument("--sigma", type=float, default=1.0)
    n.add_argument("--delta", type=float, default=0.05)
    n.add_argument("--v-dist", choices=("uniform_unit", "kernel_weights"), default="uniform_unit")
    n.add_argument("--reps", type=int, default=10_000)
    n.add_argument("--seed", type=int, default=7)
    n.add_argument("--noise", choices=("gaussian", "uniform"), default="gaussian")
    n.add_argument("--workers", type=int, default=1)
    n.add_argument("--csv", default=None)

    m = sub.add_parser("martingale-test", help="Monte-Carlo mean of the exponential supermartingale")
    m.add_argument("--t", type=int, default=50)
    m.add_argument("--lam", type=float, default=0.5)
    m.add_argument("--sigma", type=float, default=1.0)
    m.add_argument("--reps", type=int, default=100_000)
    m.add_argument("--seed", type=int, default=7)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--csv", default=None)

    v = sub.add_parser("validate-config", help="check a scenario config file")
    v.add_argument("path")

    e = sub.add_parser("emit-default-config", help="write the default experiment config")
    e.add_argument("path")
    return p


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ConfigInvalid("delta", "must lie in (0,1)")


def _cmd_simulate(args) -> int:
    from .simulation import run_scenario, write_outputs

    cfg = load_config(args.config)
    if args.message_log and not cfg.message_log:
        raw = dict(cfg.raw)
        raw["output"] = {**raw.get("output", {}), "message_log": True}
        cfg = parse_config(raw)
    if args.workers < 1:
        raise ConfigInvalid("workers", "must be at least 1")
    outputs = run_scenario(cfg, workers=args.workers)
    paths = write_outputs(outputs, args.out)
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK


def _report(test: str, params: dict, res, limit: float, csv_path) -> int:
    ok = res.value <= limit
    print(f"{test}: value={res.value:.6g} se={res.standard_error:.3g} limit={limit:.6g} "
          f"{'PASS' if ok else 'FAIL'}")
    if csv_path:
        write_lab_csv([lab.lab_row(test, params, res)], csv_path)
    return EXIT_OK if ok else EXIT_STAT


def _cmd_coverage(args) -> int:
    _check_delta(args.delta)
    design = uniform_design(args.n_design, *args.design_range, args.seed)
    res = lab.local_bound_coverage(args.x, design, args.h, Phenomenon(), args.sigma, args.delta,
                              args.reps, args.seed, lipschitz_L=args.lipschitz, noise=args.noise,
                              h_range=tuple(args.optimal_h) if args.optimal_h else None,
                              workers=args.workers)
    params = {"x": args.x, "n_design": args.n_design, "design_range": list(args.design_range),
              "h": args.h, "optimal_h": args.optimal_h, "sigma": args.sigma, "delta": args.delta,
              "lipschitz_L": args.lipschitz, "replications": args.reps, "seed": args.seed,
              "noise": args.noise}
    return _report("local_bound_coverage", params, res, binomial_threshold(args.delta, args.reps), args.csv)


def _cmd_selfnorm(args) -> int:
    _check_delta(args.delta)
    res = lab.selfnorm_violation_rate(args.t, args.sigma, args.delta, args.v_dist, args.reps,
                                      args.seed, noise=args.noise, workers=args.workers)
    params = {"t": args.t, "sigma": args.sigma, "delta": args.delta, "v_dist": args.v_dist,
              "replications": args.reps, "seed": args.seed, "noise": args.noise}
    return _report("selfnorm_violation_rate", params, res,
                   binomial_threshold(args.delta, args.reps), args.csv)


def _cmd_martingale(args) -> int:
    res = lab.martingale_mean(args.t, args.lam, args.sigma, args.reps, args.seed, workers=args.workers)
    params = {"t": args.t, "lambda": args.lam, "sigma": args.sigma, "replications": args.reps,
              "seed": args.seed}
    return _report("martingale_mean", params, res, 1.0 + 3.0 * res.standard_error, args.csv)


def _cmd_validate(args) -> int:
    load_config(args.path)
    print(f"{args.path}: ok")
    return EXIT_OK


def _cmd_emit(args) -> int:
    dump_config(default_config(), args.path)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "coverage-test": _cmd_coverage,
    "selfnorm-test": _cmd_selfnorm,
    "martingale-test": _cmd_martingale,
    "validate-config": _cmd_validate,
    "emit-default-config": _cmd_emit,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except IOFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ConfigInvalid as e:
        print(f"error: invalid config: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (NPDiffusionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
