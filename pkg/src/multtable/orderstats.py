"""Generalized ballot problems for uniform order statistics.

staircase_volume(r, u, v) is the probability that r sorted uniforms stay
above the staircase xi_i >= (i-u)/v, i.e. r! times the volume of the cut
ordered simplex.  composition_sum(r, u, v) is its discrete analogue: the
sum of 1/(g_1! ... g_v!) over compositions of r whose prefix sums obey
g_1 + ... + g_i <= i + u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded

MAX_STAIRCASE_R = 60


@dataclass(frozen=True)
class StaircaseSpec:
    """Constraint parameters; the slack w = u + v - r is derived, not stored."""

    r: int
    u: float
    v: float

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.u < 0 or self.v < 1:
            raise ValueError(f"need u >= 0 and v >= 1, got (u, v) = ({self.u}, {self.v})")

    @property
    def w(self) -> float:
        return self.u + self.v - self.r


def staircase_volume(r: int, u: float, v: float) -> float:
    """P(xi_i >= (i-u)/v for all i | xi sorted uniform on [0,1]^r), exact.

    Iterated-integration recursion with polynomial coefficients carried in
    double precision; capped at r = 60 for numeric stability.  Equals 1
    whenever u >= r (all constraints vacuous).
    """
    spec = StaircaseSpec(r=r, u=u, v=v)
    if r > MAX_STAIRCASE_R:
        raise ValueError(f"r = {r} above the stability cap {MAX_STAIRCASE_R}")
    if u >= r:
        return 1.0
    cuts = [max((i - u) / v, 0.0) for i in range(1, r + 1)]
    if cuts[-1] >= 1.0:
        return 0.0
    # poly holds coefficients of P_j on [cut_j, 1]; P_j vanishes below cut_j
    poly = [1.0]
    for c in cuts:
        anti = [0.0] + [coef / (m + 1) for m, coef in enumerate(poly)]
        at_cut = _horner(anti, c)
        anti[0] = -at_cut
        poly = anti
    value = math.factorial(r) * _horner(poly, 1.0)
    return min(1.0, max(0.0, value))


def _horner(coeffs: list[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def staircase_closed_form(r: int, v: float) -> float:
    """Closed form for u = 1: ((1 + v - r)/v) (1 + 1/v)^(r-1), valid for v >= r - 1."""
    if v < r - 1:
        raise ValueError("closed form needs w = 1 + v - r >= 0")
    return (1 + v - r) / v * (1 + 1 / v) ** (r - 1)


def staircase_volume_mc(r: int, u: float, v: float, n: int, seed: int = 0) -> tuple[float, float]:
    """Monte Carlo estimate with binomial standard error; seed-deterministic."""
    if n < 1000:
        raise ValueError(f"need n >= 1000 samples, got {n}")
    StaircaseSpec(r=r, u=u, v=v)
    rng = np.random.default_rng(seed)
    cuts = (np.arange(1, r + 1) - u) / v
    hits = 0
    chunk = 1 << 16
    done = 0
    while done < n:
        m = min(chunk, n - done)
        xi = np.sort(rng.random((m, r)), axis=1)
        hits += int(np.count_nonzero(np.all(xi >= cuts, axis=1)))
        done += m
    p = hits / n
    return p, math.sqrt(max(p * (1 - p), 1.0 / n) / n)


def staircase_band_ratio(r: int, u: float, v: float) -> float:
    """staircase_volume divided by its comparison shape min{1, u w / r}."""
    w = u + v - r
    shape = min(1.0, u * w / r)
    return staircase_volume(r, u, v) / shape


def composition_sum(r: int, u: float, v: int, mode: str = "auto") -> float:
    """Sum of 1/(g_1!...g_v!) over compositions g of r with prefix cap i + u.

    Equals v^r / r! when u >= r (the multinomial identity).  "dp" runs a
    prefix-sum dynamic program in O(v r^2); "enumerate" walks compositions
    directly and is kept as a cross-check for r, v <= 12.
    """
    if r < 0 or v < 1:
        raise ValueError(f"need r >= 0 and v >= 1, got (r, v) = ({r}, {v})")
    if u < 0:
        raise ValueError(f"need u >= 0, got {u}")
    if mode == "auto":
        mode = "dp"
    if mode == "dp":
        return _composition_sum_dp(r, u, v)
    if mode == "enumerate":
        if r > 12 or v > 12:
            raise BudgetExceeded(required_bits=(r + 1) ** v, budget_bits=12**12)
        return _composition_sum_enum(r, u, v)
    raise ValueError(f"unknown mode {mode!r}")


def _composition_sum_dp(r: int, u: float, v: int) -> float:
    inv_fact = [1.0 / math.factorial(j) for j in range(r + 1)]
    state = np.zeros(r + 1)
    state[0] = 1.0
    for i in range(1, v + 1):
        cap = min(r, math.floor(i + u))
        nxt = np.zeros(r + 1)
        for total in range(cap + 1):
            acc = 0.0
            for g in range(total + 1):
                acc += state[total - g] * inv_fact[g]
            nxt[total] = acc
        state = nxt
    return float(state[r])


def _composition_sum_enum(r: int, u: float, v: int) -> float:
    total = 0.0

    def rec(level: int, prefix: int, weight: float):
        nonlocal total
        if level == v:
            if prefix == r:
                total += weight
            return
        cap = min(r - prefix, math.floor(level + 1 + u) - prefix)
        for g in range(max(0, cap) + 1):
            if prefix + g <= math.floor(level + 1 + u):
                rec(level + 1, prefix + g, weight / math.factorial(g))

    rec(0, 0, 1.0)
    return total


def composition_band_ratio(r: int, u: float, v: int) -> float:
    """composition_sum normalized by (v^r/r!) min{1, (u+1)(w+1)/r}."""
    w = u + v - r
    shape = v**r / math.factorial(r) * min(1.0, (u + 1) * (w + 1) / r)
    return composition_sum(r, u, v) / shape
