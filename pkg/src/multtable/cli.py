"""Command-line interface.

Subcommands expose the counting oracles, the volume engine, the asymptotic
predictions, the Poisson slab and order-statistics evaluators, the prime
ladder, and the named experiments.  Exit codes: 0 success, 2 invalid
arguments, 3 resource limit hit.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import asymptotics, counting, experiments, geometry, orderstats, poisson
from .arith import PrimeSieve
from .errors import BudgetExceeded, EnumerationOverflow, UnsupportedDimension

ENV_SIEVE_LIMIT = "MULTTABLE_SIEVE_LIMIT"


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _default_sieve_limit() -> int:
    return int(os.environ.get(ENV_SIEVE_LIMIT, 1_000_000))


def _emit(payload, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, default=experiments._json_default))
    else:
        print(payload)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multtable",
        description="multiplication-table counts, divisor-chain geometry and asymptotics",
    )
    parser.add_argument("--format", choices=("plain", "json"), default="plain",
                        help="output format for scalar results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sieve-limit", type=int, default=None)
    parser.add_argument("--caps", type=_floats, default=None,
                        help="comma-separated per-coordinate truncation caps")
    parser.add_argument("--budget-bits", type=int, default=counting.DEFAULT_BUDGET_BITS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count-a", help="distinct products of a table")
    p.add_argument("--n", type=_ints, required=True, help="sides, e.g. 4,4")

    p = sub.add_parser("count-h", help="integers with a divisor tuple in windows")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=_floats, required=True)
    p.add_argument("--z", type=_floats, default=None, help="defaults to 2y")
    p.add_argument("--squarefree", action="store_true")

    p = sub.add_parser("volume", help="box-union volume of a squarefree tuple")
    p.add_argument("--a", type=_ints, required=True)

    p = sub.add_parser("s-sum", help="volume-weighted harmonic sum over window tuples")
    p.add_argument("--t", type=_floats, required=True)

    p = sub.add_parser("predict", help="asymptotic profile and predicted densities")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--y", type=_floats, required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=0.01)

    p = sub.add_parser("alpha", help="solve the implicit saddle exponent")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ell", type=_floats, required=True)

    p = sub.add_parser("poisson", help="slab probability and bound shape")
    p.add_argument("--z", type=_floats, required=True)
    p.add_argument("--lam", type=_floats, required=True)
    p.add_argument("--r-value", type=float, required=True)
    p.add_argument("--mode", choices=("exact", "monte_carlo"), default="exact")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("orderstats", help="staircase volume for sorted uniforms")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--mc", action="store_true", help="Monte Carlo instead of exact")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("ladder", help="greedy prime ladder of one coordinate")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--y", type=_floats, required=True)

    p = sub.add_parser("experiment", help="run a named experiment from a config file")
    p.add_argument("config", help="flat JSON config file")

    return parser


def _dispatch(args: argparse.Namespace) -> int:
    limit = args.sieve_limit if args.sieve_limit is not None else _default_sieve_limit()
    if args.command == "count-a":
        value = counting.count_products(args.n, budget_bits=args.budget_bits)
        _emit(value, args.format)
    elif args.command == "count-h":
        z = args.z if args.z is not None else tuple(2 * v for v in args.y)
        sieve = PrimeSieve(limit) if args.x <= limit else None
        fn = counting.count_localized_squarefree if args.squarefree else counting.count_localized
        _emit(fn(args.x, args.y, z, sieve), args.format)
    elif args.command == "volume":
        sieve = PrimeSieve(max(1000, max(args.a) + 1))
        union = geometry.build_chain_boxes(args.a, sieve)
        payload = {"volume": geometry.box_union_volume(union), "boxes": len(union.boxes)}
        _emit(payload if args.format == "json" else payload["volume"], args.format)
    elif args.command == "s-sum":
        sieve = PrimeSieve(limit)
        caps = args.caps if args.caps is not None else counting.default_caps(args.t)
        res = counting.volume_harmonic_sum(args.t, caps, sieve)
        _emit({"value": res.value, "tuples": res.tuples, "caps": caps}
              if args.format == "json" else res.value, args.format)
    elif args.command == "predict":
        if args.k != len(args.y):
            raise ValueError(f"--k {args.k} does not match {len(args.y)} sides")
        prof = asymptotics.profile(args.y)
        densities = {}
        flags = {}
        for variant in asymptotics.DENSITY_VARIANTS:
            res = asymptotics.predicted_density(prof, variant, delta=args.delta, eps=args.eps)
            densities[variant] = res.value
            flags[variant] = res.flags
        print(json.dumps({
            "k": prof.k, "y": list(prof.y), "ell": list(prof.ell),
            "i1": prof.i1, "i0": prof.i0, "beta": prof.beta,
            "alpha": prof.alpha, "alpha_residual": prof.alpha_residual,
            "densities": densities, "flags": flags,
        }, sort_keys=True))
    elif args.command == "alpha":
        if args.k != len(args.ell):
            raise ValueError(f"--k {args.k} does not match {len(args.ell)} gaps")
        alpha, residual = asymptotics.solve_exponent(args.ell)
        _emit({"alpha": alpha, "residual": residual} if args.format == "json" else alpha,
              args.format)
    elif args.command == "poisson":
        spec = poisson.PoissonSpec(z=args.z, lam=args.lam)
        res = poisson.slab_prob(spec, args.r_value, mode=args.mode,
                                n=args.samples, seed=args.seed)
        print(json.dumps({
            "value": res.value, "log_value": res.log_value,
            "error_bound": res.error_bound, "tilt": res.tilt,
            "hypothesis_ok": res.hypothesis_ok,
            "bound_shape": poisson.slab_bound_shape(spec, args.r_value),
        }, sort_keys=True))
    elif args.command == "orderstats":
        if args.mc:
            est, err = orderstats.staircase_volume_mc(args.r, args.u, args.v,
                                                      args.samples, seed=args.seed)
            _emit({"estimate": est, "stderr": err} if args.format == "json" else est,
                  args.format)
        else:
            _emit(orderstats.staircase_volume(args.r, args.u, args.v), args.format)
    elif args.command == "ladder":
        sieve = PrimeSieve(limit)
        ladder = asymptotics.build_prime_ladder(args.k, args.i, args.y, sieve)
        print(json.dumps({
            "lambdas": list(ladder.lambdas), "v": ladder.v,
            "interval_sums": list(ladder.interval_sums), "target": ladder.target,
        }, sort_keys=True))
    elif args.command == "experiment":
        config = experiments.load_config(args.config)
        records = experiments.run_experiment(config)
        if config.output is None:
            sys.stdout.write(experiments.serialize_records(records, config.fmt))
        else:
            print(f"wrote {len(records)} records to {config.output}")
    else:  # pragma: no cover - argparse enforces the choices
        raise ValueError(f"unknown command {args.command!r}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except (BudgetExceeded, EnumerationOverflow) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3
    except (ValueError, UnsupportedDimension, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
