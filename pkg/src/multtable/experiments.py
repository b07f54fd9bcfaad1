"""Experiment orchestration and result persistence.

Six named experiments (E1-E6) exercise the counting oracles against their
asymptotic predictions and the inequality suites.  Each grid point becomes
one self-describing record; per-point failures are recorded in-row and the
run continues.  Records are sorted by parameter tuple before emission, so
output is scheduler-independent, and timestamps live in a separate meta
column so re-runs with one seed are byte-identical elsewhere.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import asymptotics, counting, geometry, orderstats, poisson
from .arith import PrimeSieve
from .errors import BudgetExceeded, EnumerationOverflow

EXPERIMENTS = ("E1", "E2", "E3", "E4", "E5", "E6")

_REQUIRED_KEYS = {
    "E1": ("n_values",),
    "E2": ("side_vectors",),
    "E3": ("points",),
    "E4": ("samples",),
    "E5": ("samples",),
    "E6": ("points",),
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: dict
    sieve_limit: int = 1_000_000
    seed: int = 0
    budget_bits: int = counting.DEFAULT_BUDGET_BITS
    caps_power: float = 3.0
    output: str | None = None
    fmt: str = "jsonl"
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.fmt not in ("jsonl", "csv"):
            raise ValueError(f"format must be jsonl or csv, got {self.fmt!r}")
        for key in _REQUIRED_KEYS[self.experiment]:
            if key not in self.params or not self.params[key]:
                raise ValueError(f"{self.experiment} needs a nonempty {key!r}")


def load_config(path: str) -> ExperimentConfig:
    """Read a flat JSON config file (no templating)."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {"experiment", "sieve_limit", "seed", "budget_bits", "caps_power",
             "output", "format", "workers"}
    experiment = raw.get("experiment")
    if experiment is None:
        raise ValueError("config needs an 'experiment' key")
    params = {k: v for k, v in raw.items() if k not in known}
    return ExperimentConfig(
        experiment=experiment,
        params=params,
        sieve_limit=int(raw.get("sieve_limit", 1_000_000)),
        seed=int(raw.get("seed", 0)),
        budget_bits=int(raw.get("budget_bits", counting.DEFAULT_BUDGET_BITS)),
        caps_power=float(raw.get("caps_power", 3.0)),
        output=raw.get("output"),
        fmt=raw.get("format", "jsonl"),
        workers=int(raw.get("workers", 1)),
    )


def _record(experiment: str, point: dict, values: dict | None,
            provenance: dict, error: Exception | None, runtime: float) -> dict:
    err = None
    if error is not None:
        kind = {
            BudgetExceeded: "resource-limit",
            EnumerationOverflow: "enumeration-overflow",
        }.get(type(error), "error")
        err = {"type": kind, "detail": str(error)}
    return {
        "experiment": experiment,
        "point": point,
        "values": values,
        "provenance": provenance,
        "error": err,
        "meta": {"runtime_s": round(runtime, 6), "timestamp": time.time()},
    }


def _run_points(config: ExperimentConfig, points: list[dict],
                worker: Callable[[dict], tuple[dict, dict]]) -> list[dict]:
    def one(point: dict) -> dict:
        start = time.perf_counter()
        try:
            values, provenance = worker(point)
            error = None
        except (BudgetExceeded, EnumerationOverflow, ValueError) as exc:
            values, provenance, error = None, {}, exc
        provenance = {"seed": config.seed, **provenance}
        return _record(config.experiment, point, values, provenance, error,
                       time.perf_counter() - start)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(one, points))
    else:
        records = [one(p) for p in points]
    # sorting by the parameter tuple makes output scheduler-independent
    records.sort(key=lambda r: json.dumps(r["point"], sort_keys=True))
    return records


def _suite_seed(seed: int, suite: str) -> int:
    """Deterministic per-suite stream (string hash() is process-randomized)."""
    return seed + zlib.crc32(suite.encode()) % 100_000


FORD_EXPONENT_U = 1 / math.log(2)


def ford_normalization(n: int, count: int) -> float:
    """count * (log n)^Q(1/log 2) * (log log n)^(3/2) / n^2."""
    q = asymptotics.q_rate(FORD_EXPONENT_U)
    return count * math.log(n) ** q * math.log(math.log(n)) ** 1.5 / n**2


def run_e1(config: ExperimentConfig) -> list[dict]:
    """Two-sided table counts with the classic normalization."""
    points = [{"n": int(n)} for n in config.params["n_values"]]

    def worker(point: dict):
        n = point["n"]
        count = counting.count_products((n, n), budget_bits=config.budget_bits)
        return (
            {"count": count, "normalized": ford_normalization(n, count)},
            {"budget_bits": config.budget_bits},
        )

    return _run_points(config, points, worker)


def run_e2(config: ExperimentConfig) -> list[dict]:
    """Distinct products against window-hit counts, with the sandwich checks."""
    points = [{"sides": tuple(int(s) for s in sides)}
              for sides in config.params["side_vectors"]]
    sieve = PrimeSieve(config.sieve_limit)

    def worker(point: dict):
        sides = sorted(point["sides"])
        k = len(sides) - 1
        if k < 1:
            raise ValueError("need at least two sides")
        total = math.prod(sides)
        prod_count = counting.count_products(sides, budget_bits=config.budget_bits)
        y = [s / 2 for s in sides[:-1]]
        z = [float(s) for s in sides[:-1]]
        hits = counting.count_localized(total, y, z, sieve)
        lower = counting.count_localized(
            total / 2 ** (k * k), [s / 2**k for s in sides[:-1]],
            [s / 2 ** (k - 1) for s in sides[:-1]], sieve)
        upper = 0
        shifts = [range(s.bit_length()) for s in sides[:-1]]
        for ms in _iter_product(shifts):
            xq = total / 2 ** sum(ms)
            yq = [s / 2 ** (m + 1) for s, m in zip(sides[:-1], ms)]
            zq = [s / 2**m for s, m in zip(sides[:-1], ms)]
            upper += counting.count_localized(xq, yq, zq, sieve)
        return (
            {
                "product_count": prod_count,
                "window_hits": hits,
                "ratio": prod_count / hits if hits else math.inf,
                "sandwich_lower": lower,
                "sandwich_upper": upper,
                "sandwich_ok": lower <= prod_count <= upper,
            },
            {"sieve_limit": config.sieve_limit, "budget_bits": config.budget_bits},
        )

    return _run_points(config, points, worker)


def _iter_product(ranges):
    import itertools

    return itertools.product(*ranges)


def run_e3(config: ExperimentConfig) -> list[dict]:
    """Local-to-global ratio with cap-sensitivity reporting."""
    points = [{"x": float(p["x"]), "y": tuple(float(v) for v in p["y"])}
              for p in config.params["points"]]
    sieve = PrimeSieve(config.sieve_limit)

    def worker(point: dict):
        caps = tuple(v**config.caps_power for v in point["y"])
        full = counting.local_global_ratio(point["x"], point["y"], sieve, caps=caps)
        halved = counting.local_global_ratio(point["x"], point["y"], sieve,
                                             caps=tuple(c / 2 for c in caps))
        return (
            {
                "lhs": full["lhs"],
                "rhs": full["rhs"],
                "ratio": full["ratio"],
                "admissible": full["admissible"],
                "sum_tuples": full["sum_tuples"],
                "rhs_half_caps": halved["rhs"],
            },
            {"caps": list(caps), "sieve_limit": config.sieve_limit},
        )

    return _run_points(config, points, worker)


def _random_squarefree_tuple(rng: np.random.Generator, sieve: PrimeSieve, k: int,
                             prime_bound: int, max_omega: int = 2,
                             max_chains: int = 2**16) -> tuple[int, ...]:
    """Random coprime squarefree tuple with primes below prime_bound."""
    primes = [int(p) for p in sieve.primes_between(1, prime_bound)]
    while True:
        chosen = []
        pool = list(primes)
        ok = True
        for _ in range(k):
            count = int(rng.integers(0, max_omega + 1))
            if count > len(pool):
                ok = False
                break
            idx = rng.choice(len(pool), size=count, replace=False)
            picked = [pool[j] for j in sorted(int(i) for i in idx)]
            for p in picked:
                pool.remove(p)
            chosen.append(math.prod(picked) if picked else 1)
        if not ok:
            continue
        tup = tuple(chosen)
        if geometry.chain_count(tup, sieve) <= max_chains:
            return tup


def run_e4(config: ExperimentConfig) -> list[dict]:
    """Volume-bound inequality suites on random squarefree tuples."""
    samples = int(config.params["samples"])
    sieve = PrimeSieve(max(config.sieve_limit, 1000))
    points = [{"suite": name} for name in
              ("volume_bound", "split_bound", "divisor_split", "pair_moment_holder",
               "cylinder")]

    def worker(point: dict):
        suite = point["suite"]
        local = np.random.default_rng(_suite_seed(config.seed, suite))
        violations = 0
        worst = math.inf
        for _ in range(samples):
            k = int(local.integers(1, 4))
            a = _random_squarefree_tuple(local, sieve, k, 100)
            vol = geometry.chain_volume(a, sieve)
            if suite == "volume_bound":
                margin = geometry.chain_volume_bound(a, sieve) - vol
            elif suite == "split_bound":
                b = _random_squarefree_tuple(local, sieve, k, 100)
                if math.gcd(math.prod(a), math.prod(b)) != 1:
                    continue
                ab = tuple(x * y for x, y in zip(a, b))
                margin = geometry.split_volume_bound(a, b, sieve) - geometry.chain_volume(ab, sieve)
            elif suite == "divisor_split":
                zseqs = geometry.admissible_split_sequences(k)
                margin = min(geometry.divisor_split_bound(a, zs, sieve) for zs in zseqs) - vol
            elif suite == "pair_moment_holder":
                p_exp = float(local.choice([1.25, 1.5, 2.0]))
                group = [_random_squarefree_tuple(local, sieve, k, 100) for _ in range(5)]
                w = sum(geometry.chain_pair_moment(t, p_exp, sieve) / math.prod(t) for t in group)
                lsum = sum(geometry.chain_volume(t, sieve) / math.prod(t) for t in group)
                tau = sum(geometry.chain_count(t, sieve) / math.prod(t) for t in group)
                lhs = w ** (1 / p_exp) * (lsum / math.log(2) ** k) ** (1 - 1 / p_exp)
                margin = lhs - tau
            else:  # cylinder
                if k == 1:
                    continue
                l = int(local.integers(1, k))
                merged = (math.prod(a[: l + 1]),) + a[l + 1 :]
                margin = vol - math.log(2) ** l * geometry.chain_volume(merged, sieve)
            if margin < -1e-9:
                violations += 1
            worst = min(worst, margin)
        return ({"violations": violations, "worst_margin": worst, "samples": samples},
                {"sieve_limit": sieve.limit})

    return _run_points(config, points, worker)


def run_e5(config: ExperimentConfig) -> list[dict]:
    """Slab-probability and order-statistics band measurements."""
    samples = int(config.params["samples"])
    points = [{"suite": name} for name in
              ("staircase_band", "composition_band", "slab_shape_band", "tail_band")]

    def worker(point: dict):
        suite = point["suite"]
        rng = np.random.default_rng(_suite_seed(config.seed, suite))
        ratios = []
        if suite == "staircase_band":
            for _ in range(samples):
                r = int(rng.integers(1, 41))
                u = int(rng.integers(1, r + 1))
                w = int(rng.integers(1, 41))
                ratios.append(orderstats.staircase_band_ratio(r, u, r - u + w))
        elif suite == "composition_band":
            for _ in range(samples):
                r = int(rng.integers(1, 11))
                v = int(rng.integers(1, 11))
                u = int(rng.integers(max(0, r - v), r + 1))
                ratios.append(orderstats.composition_band_ratio(r, u, v))
        elif suite == "slab_shape_band":
            for _ in range(samples):
                k = int(rng.integers(1, 4))
                spec = poisson.PoissonSpec(
                    z=tuple(float(z) for z in rng.uniform(1.0, 4.0, size=k)),
                    lam=tuple(float(l) for l in rng.uniform(0.5, 2.0, size=k)),
                )
                r_val = float(rng.uniform(spec.big_lambda, 40 * spec.mean))
                res = poisson.slab_prob(spec, r_val)
                ratios.append(math.exp(res.log_value - poisson.slab_bound_log_shape(spec, r_val)))
        else:  # tail_band
            for _ in range(samples):
                k = int(rng.integers(1, 4))
                lam = rng.uniform(0.5, 1.5, size=k)
                mu = lam * rng.uniform(1.2, 2.0, size=k)
                z = rng.uniform(1.0, 4.0, size=k)
                spec = poisson.PoissonSpec(z=tuple(map(float, z)), lam=tuple(map(float, lam)))
                big_z = float(mu @ z)
                if big_z < spec.big_lambda:
                    continue
                tail, _ = poisson.upper_tail_weighted(spec, big_z, power=1.0)
                slab = poisson.slab_prob(spec, big_z).value
                if slab > 0:
                    ratios.append(tail / slab)
        return ({"min_ratio": min(ratios), "max_ratio": max(ratios), "count": len(ratios)},
                {})

    return _run_points(config, points, worker)


def run_e6(config: ExperimentConfig) -> list[dict]:
    """Measured window-hit density against the predicted densities."""
    points = [{"x": float(p["x"]), "y": tuple(float(v) for v in p["y"])}
              for p in config.params["points"]]
    sieve = PrimeSieve(config.sieve_limit)

    def worker(point: dict):
        prof = asymptotics.profile(point["y"])
        measured = counting.count_localized(
            point["x"], point["y"], [2 * v for v in point["y"]], sieve) / point["x"]
        densities = {}
        flags = {}
        for variant in asymptotics.DENSITY_VARIANTS:
            res = asymptotics.predicted_density(prof, variant)
            densities[variant] = res.value
            flags[variant] = res.flags
        return (
            {
                "measured": measured,
                "alpha": prof.alpha,
                "beta": prof.beta,
                "densities": densities,
                "ratio_main": measured / densities["main"],
                "flags": flags["main"],
            },
            {"sieve_limit": config.sieve_limit},
        )

    return _run_points(config, points, worker)


_RUNNERS = {"E1": run_e1, "E2": run_e2, "E3": run_e3, "E4": run_e4,
            "E5": run_e5, "E6": run_e6}


def run_experiment(config: ExperimentConfig) -> list[dict]:
    records = _RUNNERS[config.experiment](config)
    if config.output:
        write_records(records, config.output, config.fmt)
    return records


def serialize_records(records: Sequence[dict], fmt: str = "jsonl",
                      include_meta: bool = True) -> str:
    """Canonical serialization; drop meta to compare runs byte for byte."""
    rows = []
    for rec in records:
        row = dict(rec)
        if not include_meta:
            row.pop("meta", None)
        rows.append(row)
    if fmt == "jsonl":
        return "\n".join(json.dumps(r, sort_keys=True, default=_json_default) for r in rows) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["experiment", "point", "values", "provenance", "error", "meta"])
        for r in rows:
            writer.writerow([
                r["experiment"],
                json.dumps(r["point"], sort_keys=True, default=_json_default),
                json.dumps(r["values"], sort_keys=True, default=_json_default),
                json.dumps(r["provenance"], sort_keys=True, default=_json_default),
                json.dumps(r["error"], sort_keys=True, default=_json_default),
                json.dumps(r.get("meta"), sort_keys=True, default=_json_default),
            ])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serializable: {type(obj)}")


def write_records(records: Sequence[dict], path: str, fmt: str = "jsonl") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_records(records, fmt))
