"""Closed-form and implicitly defined asymptotic quantities.

The rate function u log u - u + 1, log-scale gap profiles of table sides,
the implicit saddle exponent and its clustering correction, the sharpness
threshold for the two-sided density estimate, greedy prime ladders with
near-constant reciprocal mass, and predicted densities for the counting
problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .arith import PrimeSieve


def q_rate(u: float) -> float:
    """The rate function u log u - u + 1 (zero and minimal at u = 1)."""
    if u <= 0:
        raise ValueError(f"rate function needs u > 0, got {u}")
    return u * math.log(u) - u + 1.0


def log_gaps(y: Sequence[float]) -> tuple[float, ...]:
    """Gaps ell_i = log(3 log y_i / log y_{i-1}) with y_0 = 3; needs sorted y >= 3."""
    y = tuple(float(v) for v in y)
    if not y or y[0] < 3 or any(y[i] > y[i + 1] for i in range(len(y) - 1)):
        raise ValueError("sides must be >= 3 and sorted ascending")
    out = []
    prev = 3.0
    for yi in y:
        out.append(math.log(3.0 * math.log(yi) / math.log(prev)))
        prev = yi
    return tuple(out)


def dominant_index(ell: Sequence[float]) -> int:
    """Smallest 1-based index attaining max ell_i."""
    best = max(ell)
    for i, v in enumerate(ell):
        if v == best:
            return i + 1
    raise ValueError("empty gap vector")


def clustering_factor(ell: Sequence[float], i1: int | None = None) -> float:
    """min{1, (1 + sum before the peak)(1 + sum after the peak) / peak}."""
    if i1 is None:
        i1 = dominant_index(ell)
    before = 1.0 + sum(ell[: i1 - 1])
    after = 1.0 + sum(ell[i1:])
    return min(1.0, before * after / ell[i1 - 1])


def solve_exponent(ell: Sequence[float]) -> tuple[float, float]:
    """Root alpha of sum (k-i+2)^a log(k-i+2) ell_i = sum (k-i+1) ell_i.

    The left side is strictly increasing in a, and the root always lies in
    [0, 2]; bisection plus a Newton polish gives |relative residual| below
    1e-12.  Returns (alpha, relative residual).
    """
    k = len(ell)
    if k == 0 or any(l <= 0 for l in ell):
        raise ValueError("gap vector must be nonempty and positive")
    logs = [math.log(k - i + 1) for i in range(k)]  # log(k-i+2), i 1-based
    weights = [l * c for l, c in zip(ell, logs)]
    target = sum((k - i) * l for i, l in enumerate(ell))

    def lhs(a: float) -> float:
        return sum(w * math.exp(a * c) for w, c in zip(weights, logs))

    lo, hi = 0.0, 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if lhs(mid) < target:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    for _ in range(3):
        deriv = sum(w * c * math.exp(alpha * c) for w, c in zip(weights, logs))
        alpha -= (lhs(alpha) - target) / deriv
    residual = abs(lhs(alpha) - target) / target
    return alpha, residual


def order_exponent(i: int) -> float:
    """The exponent scale (1/log(i+1)) log(i / log(i+1)); strictly increasing in i."""
    if i < 1:
        raise ValueError(f"index must be >= 1, got {i}")
    return math.log(i / math.log(i + 1)) / math.log(i + 1)


def nearest_order_index(k: int, alpha: float) -> int:
    """Smallest 1-based i minimizing |alpha - order_exponent(k-i+1)|."""
    best_i, best_gap = 1, math.inf
    for i in range(1, k + 1):
        gap = abs(alpha - order_exponent(k - i + 1))
        if gap < best_gap:
            best_i, best_gap = i, gap
    return best_i


def two_sided_threshold(k: int) -> float:
    """1 - (1/log(k+1)) log(((k+1) log(k+1) - 2 log 2)/(k-1)); increasing in k."""
    if k < 2:
        raise ValueError(f"threshold needs k >= 2, got {k}")
    return 1.0 - math.log(((k + 1) * math.log(k + 1) - 2 * math.log(2)) / (k - 1)) / math.log(k + 1)


def two_sided_condition(k: int, alpha: float, eps: float) -> bool:
    """Whether alpha clears the sharp two-sided threshold with margin eps."""
    if k < 2:
        raise ValueError(f"condition needs k >= 2, got {k}")
    return alpha >= eps + two_sided_threshold(k)


def failure_interval(k: int) -> tuple[float, float, bool]:
    """Exponent range (lo, hi) where the clustered prediction overshoots.

    lo is the k-independent floor order_exponent(1); hi the two-sided
    threshold.  Nonempty first at k = 6.
    """
    lo = order_exponent(1)
    hi = two_sided_threshold(k)
    return lo, hi, lo < hi


def failure_interval_possible(k: int) -> bool:
    """Whether the failure interval sits below the attainable exponent maximum.

    Evaluates (k+1) log(k+1) > k log 4, the equivalent arithmetic form.
    """
    if k < 2:
        raise ValueError(f"needs k >= 2, got {k}")
    return (k + 1) * math.log(k + 1) > k * math.log(4)


def ladder_ratio(m: int) -> float:
    """Geometric step (m+1)^(1/m) of the prime ladders."""
    if m < 1:
        raise ValueError(f"needs m >= 1, got {m}")
    return (m + 1) ** (1.0 / m)


def mean_slope(x: float, h: float) -> float:
    """Mean slope of t -> (t+1) log(t+1) over [x-h, x]; needs 0 < h <= x.

    Decreasing in h, increasing in x.
    """
    if not 0 < h <= x:
        raise ValueError(f"needs 0 < h <= x, got (x, h) = ({x}, {h})")
    return ((x + 1) * math.log(x + 1) - (x - h + 1) * math.log(x - h + 1)) / h


@dataclass(frozen=True)
class PrimeLadder:
    """Greedy prime partition of (max{k, y_{i-1}}, y_i] for coordinate i.

    Each rung extends as far as possible while its reciprocal prime sum
    stays below log(ladder_ratio(k-i+1)); v is the rung count, intervals
    the half-open prime ranges (lambda_{j-1}, lambda_j].
    """

    coordinate: int
    lambdas: tuple[int, ...]  # lambda_0..lambda_v
    v: int
    interval_sums: tuple[float, ...]
    target: float

    @property
    def intervals(self) -> tuple[tuple[int, int], ...]:
        return tuple((self.lambdas[j], self.lambdas[j + 1]) for j in range(self.v))


def build_prime_ladder(k: int, i: int, y: Sequence[float], sieve: PrimeSieve) -> PrimeLadder:
    """Ladder for coordinate i (1-based) of a k-dimensional side vector y."""
    if not 1 <= i <= k or len(y) != k:
        raise ValueError("need 1 <= i <= k = len(y)")
    y_prev = 3.0 if i == 1 else float(y[i - 2])
    y_i = float(y[i - 1])
    if y_i > sieve.limit:
        raise ValueError(f"y_{i} = {y_i} beyond sieve limit {sieve.limit}")
    start = max(k, math.floor(y_prev))
    target = math.log(ladder_ratio(k - i + 1))
    primes = sieve.primes_between(start, y_i)
    lambdas = [start]
    sums: list[float] = []
    if len(primes):
        recip = np.cumsum(1.0 / primes)
        pos = 0
        base = 0.0
        while pos < len(primes):
            nxt = int(np.searchsorted(recip, base + target, side="right"))
            if nxt == pos:  # cannot happen for primes > k, kept as a guard
                nxt = pos + 1
            lambdas.append(int(primes[nxt - 1]))
            sums.append(float(recip[nxt - 1] - base))
            base = float(recip[nxt - 1])
            pos = nxt
    return PrimeLadder(coordinate=i, lambdas=tuple(lambdas), v=len(lambdas) - 1,
                       interval_sums=tuple(sums), target=target)


@dataclass(frozen=True)
class AsymptoticProfile:
    """Everything the density predictions need about one side vector."""

    k: int
    y: tuple[float, ...]
    ell: tuple[float, ...]
    i1: int
    beta: float
    alpha: float
    alpha_residual: float
    i0: int
    predicted_density: float


DENSITY_VARIANTS = ("main", "small_k", "large_k", "uniform")


def profile(y: Sequence[float]) -> AsymptoticProfile:
    y = tuple(float(v) for v in y)
    ell = log_gaps(y)
    i1 = dominant_index(ell)
    beta = clustering_factor(ell, i1)
    alpha, residual = solve_exponent(ell)
    i0 = nearest_order_index(len(y), alpha)
    prof = AsymptoticProfile(k=len(y), y=y, ell=ell, i1=i1, beta=beta,
                             alpha=alpha, alpha_residual=residual, i0=i0,
                             predicted_density=math.nan)
    return replace(prof, predicted_density=predicted_density(prof, "main").value)


@dataclass(frozen=True)
class DensityResult:
    value: float
    variant: str
    flags: dict


def _gap_power_product(prof: AsymptoticProfile) -> float:
    out = 1.0
    prev = 3.0
    k = prof.k
    for i, yi in enumerate(prof.y):
        exponent = q_rate((k - i + 1) ** prof.alpha)  # (k-i+2)^alpha, i 1-based
        out *= (math.log(yi) / math.log(prev)) ** (-exponent)
        prev = yi
    return out


def predicted_density(prof: AsymptoticProfile, variant: str,
                      delta: float = 0.1, eps: float = 0.01) -> DensityResult:
    """Dimensionless predicted density (a surrogate for hits/x).

    Variants: "main" carries the clustering factor and holds for all k
    subject to the two-sided threshold; "small_k" is its k in {2..5}
    specialization; "large_k" trades the clustering factor for a log-gap
    numerator and needs tightly spaced sides (log y_k <= (log y_1)^(1+delta),
    delta a user knob); "uniform" is the classic equal-log-side shape.
    Hypothesis failures set flags, never raise.
    """
    if variant not in DENSITY_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; pick one of {DENSITY_VARIANTS}")
    k = prof.k
    log_y1 = math.log(prof.y[0])
    log_yk = math.log(prof.y[-1])
    loglog_y1 = math.log(log_y1)
    loglog_yk = math.log(log_yk)
    flags = {
        "k_in_small_range": 2 <= k <= 5,
        "k_at_least_6": k >= 6,
        "sides_tight": log_yk <= log_y1 ** (1 + delta),
        "two_sided": two_sided_condition(k, prof.alpha, eps) if k >= 2 else True,
    }
    if variant in ("main", "small_k"):
        value = prof.beta / math.sqrt(loglog_yk) * _gap_power_product(prof)
    elif variant == "large_k":
        value = math.log(3 * log_yk / log_y1) / loglog_y1**1.5 * _gap_power_product(prof)
    else:  # uniform
        value = log_y1 ** (-q_rate(k / math.log(k + 1))) / loglog_y1**1.5
    return DensityResult(value=value, variant=variant, flags=flags)
