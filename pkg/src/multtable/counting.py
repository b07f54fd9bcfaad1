"""Exact counting oracles.

Distinct products of a (k+1)-dimensional table, integers admitting a
divisor tuple inside prescribed windows, squarefree window enumerations,
and the global volume-weighted sum they are compared against.  Everything
here is deliberately brute force: these counts serve as ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .arith import PrimeSieve, factorize
from .errors import BudgetExceeded
from .geometry import DEFAULT_CHAIN_CAP, SquarefreeTuple, chain_volume

DEFAULT_BUDGET_BITS = 2**33
DEFAULT_SEGMENT_BYTES = 2**28
_PREFIX_LIMIT = 2**26
_MARKS_TUPLE_LIMIT = 2_000_000
_MARKS_RANGE_LIMIT = 50_000_000


@dataclass(frozen=True)
class TableSpec:
    """Either product mode (sides of a table) or window mode (x, y, z)."""

    sides: tuple[int, ...] | None = None
    x: float | None = None
    y: tuple[float, ...] | None = None
    z: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.sides is not None:
            if self.x is not None or self.y is not None or self.z is not None:
                raise ValueError("give either sides or (x, y, z), not both")
            if any(s < 1 for s in self.sides):
                raise ValueError("sides must be positive")
            if tuple(self.sides) != tuple(sorted(self.sides)):
                raise ValueError("sides must be sorted ascending")
        else:
            if self.x is None or self.y is None or self.z is None:
                raise ValueError("window mode needs x, y and z")
            if len(self.y) != len(self.z):
                raise ValueError("y and z must share a length")
            if any(yi >= zi for yi, zi in zip(self.y, self.z)):
                raise ValueError("windows must satisfy y_i < z_i")

    @property
    def admissible(self) -> bool:
        """Whether 2^k y_1...y_k <= x / y_k (checked, reported, never enforced)."""
        if self.y is None:
            raise ValueError("admissibility is defined for window mode")
        k = len(self.y)
        return 2**k * math.prod(self.y) <= self.x / self.y[-1]


def _distinct_products_array(sides: Sequence[int]) -> np.ndarray:
    arr = np.arange(1, sides[0] + 1, dtype=np.int64)
    for s in sides[1:]:
        arr = np.unique(np.outer(arr, np.arange(1, s + 1, dtype=np.int64)).ravel())
        if len(arr) > _PREFIX_LIMIT:
            raise BudgetExceeded(required_bits=len(arr) * 64, budget_bits=_PREFIX_LIMIT * 64)
    return arr


def count_products(sides: Sequence[int], budget_bits: int = DEFAULT_BUDGET_BITS,
                   segment_bytes: int = DEFAULT_SEGMENT_BYTES) -> int:
    """Exact number of distinct products n_1*...*n_{k+1} with n_i <= N_i.

    Uses a bit-per-integer presence set over [1, prod N_i], materialized in
    segments so resident memory stays below segment_bytes.  The presence-set
    size prod N_i is gated by budget_bits.
    """
    sides = sorted(int(s) for s in sides)
    if not sides or sides[0] < 1:
        raise ValueError("sides must be positive integers")
    total = math.prod(sides)
    if total > budget_bits:
        raise BudgetExceeded(required_bits=total, budget_bits=budget_bits)
    if len(sides) == 1:
        return sides[0]
    prefixes = _distinct_products_array(sides[:-1])
    n_last = sides[-1]
    # for a two-sided table every product has a representation with a <= b
    symmetric = len(sides) == 2
    count = 0
    seg_len = min(total, int(segment_bytes))
    for lo in range(1, total + 1, seg_len):
        hi = min(total + 1, lo + seg_len)  # products in [lo, hi)
        seg = np.zeros(hi - lo, dtype=np.uint8)
        for p in prefixes:
            p = int(p)
            if p >= hi:
                break
            b_lo = max(-(-lo // p), p if symmetric else 1)
            b_hi = min(n_last, (hi - 1) // p)
            if b_lo > b_hi:
                continue
            seg[p * b_lo - lo : p * b_hi - lo + 1 : p] = 1
        count += int(np.count_nonzero(seg))
    return count


def _window_products(x: float, y: Sequence[float], z: Sequence[float]) -> np.ndarray:
    """Distinct values d_1*...*d_k <= x with integer d_i in (y_i, z_i]."""
    prods = np.ones(1, dtype=np.int64)
    for yi, zi in zip(y, z):
        lo = math.floor(yi) + 1
        hi = math.floor(min(zi, x))
        if hi < lo:
            return np.empty(0, dtype=np.int64)
        ds = np.arange(lo, hi + 1, dtype=np.int64)
        prods = np.unique(np.outer(prods, ds).ravel())
        prods = prods[prods <= x]
        if len(prods) == 0:
            return prods
        if len(prods) * (hi - lo + 1) > 2 * _MARKS_TUPLE_LIMIT:
            raise BudgetExceeded(required_bits=len(prods) * 64, budget_bits=_MARKS_TUPLE_LIMIT * 64)
    return prods


def _squarefree_mask(x: int) -> np.ndarray:
    mask = np.ones(x + 1, dtype=bool)
    mask[0] = False
    # composite p only re-marks multiples already covered by its prime factors
    for p in range(2, math.isqrt(x) + 1):
        mask[p * p :: p * p] = False
    return mask


def _count_localized_marks(x: float, y, z, squarefree: bool) -> int:
    n_max = math.floor(x)
    if n_max < 1:
        return 0
    prods = _window_products(x, y, z)
    if len(prods) == 0:
        return 0
    marked = np.zeros(n_max + 1, dtype=np.uint8)
    for p in prods:
        p = int(p)
        marked[p::p] = 1
    if squarefree:
        marked &= _squarefree_mask(n_max).astype(np.uint8)
    return int(np.count_nonzero(marked[1:]))


def _count_localized_scan(x: float, y, z, sieve: PrimeSieve, squarefree: bool) -> int:
    n_max = math.floor(x)
    if n_max < 1:
        return 0
    if n_max > sieve.limit:
        raise ValueError(f"x = {x} beyond sieve limit {sieve.limit}")
    k = len(y)
    # try narrow windows first so dead branches die early
    order = sorted(range(k), key=lambda i: math.floor(z[i]) - math.floor(y[i]))
    ys = [y[i] for i in order]
    zs = [z[i] for i in order]
    count = 0
    for n in range(1, n_max + 1):
        fact = factorize(n, sieve)
        if squarefree and not fact.is_squarefree():
            continue
        divs = fact.divisors()
        windowed = []
        empty = False
        for yi, zi in zip(ys, zs):
            cand = [d for d in divs if yi < d <= zi]
            if not cand:
                empty = True
                break
            windowed.append(cand)
        if empty:
            continue

        def dfs(prefix: int, level: int) -> bool:
            if level == k:
                return True
            for d in windowed[level]:
                nxt = prefix * d
                if n % nxt == 0 and dfs(nxt, level + 1):
                    return True
            return False

        if dfs(1, 0):
            count += 1
    return count


def count_localized(x: float, y: Sequence[float], z: Sequence[float],
                    sieve: PrimeSieve | None = None, method: str = "auto") -> int:
    """Number of n <= x admitting d_1*...*d_k | n with y_i < d_i <= z_i.

    method "scan" decides membership per n by depth-first search over its
    divisors (needs a sieve covering x); "marks" sieves multiples of every
    admissible window product (independent of the scan, used to cross-check
    it and for large x).
    """
    if len(y) != len(z) or not y:
        raise ValueError("y and z must be nonempty and share a length")
    if any(yi >= zi for yi, zi in zip(y, z)):
        raise ValueError("windows must satisfy y_i < z_i")
    return _dispatch_localized(x, y, z, sieve, method, squarefree=False)


def count_localized_squarefree(x: float, y: Sequence[float], z: Sequence[float],
                               sieve: PrimeSieve | None = None, method: str = "auto") -> int:
    """As count_localized, restricted to squarefree n."""
    if len(y) != len(z) or not y:
        raise ValueError("y and z must be nonempty and share a length")
    if any(yi >= zi for yi, zi in zip(y, z)):
        raise ValueError("windows must satisfy y_i < z_i")
    return _dispatch_localized(x, y, z, sieve, method, squarefree=True)


def _dispatch_localized(x, y, z, sieve, method, squarefree):
    if method == "marks":
        return _count_localized_marks(x, y, z, squarefree)
    if method == "scan":
        if sieve is None:
            raise ValueError("scan method needs a sieve")
        return _count_localized_scan(x, y, z, sieve, squarefree)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    tuples = math.prod(max(0, math.floor(zi) - math.floor(yi)) for yi, zi in zip(y, z))
    if x <= _MARKS_RANGE_LIMIT and tuples <= _MARKS_TUPLE_LIMIT:
        return _count_localized_marks(x, y, z, squarefree)
    if sieve is None:
        raise ValueError("input too large for the marks method and no sieve given")
    return _count_localized_scan(x, y, z, sieve, squarefree)


def squarefree_window(y: float, z: float, sieve: PrimeSieve,
                      max_value: float | None = None, max_count: int = 2**22) -> list[int]:
    """Squarefree integers (including 1) with every prime factor in (y, z].

    Optionally truncated to values <= max_value; enumeration beyond
    max_count raises BudgetExceeded.
    """
    primes = [int(p) for p in sieve.primes_between(y, z)]
    cap = math.inf if max_value is None else max_value
    out: list[int] = []

    def rec(value: int, start: int):
        if len(out) >= max_count:
            raise BudgetExceeded(required_bits=2 ** len(primes), budget_bits=max_count)
        out.append(value)
        for j in range(start, len(primes)):
            nxt = value * primes[j]
            if nxt > cap:
                break  # primes ascend, so all later products overflow too
            rec(nxt, j + 1)

    rec(1, 0)
    out.sort()
    return out


def window_tuples(t: Sequence[float], caps: Sequence[float] | None, sieve: PrimeSieve,
                  max_count: int = 2**22) -> Iterator[SquarefreeTuple]:
    """Stream of squarefree tuples with a_i in the window (t_{i-1}, t_i], t_0 = 1.

    caps truncates coordinate values (a_i <= caps_i); None leaves them unbounded.
    """
    t = tuple(float(v) for v in t)
    k = len(t)
    bounds = (1.0,) + t
    per_coord = []
    for i in range(k):
        cap_i = None if caps is None else caps[i]
        per_coord.append(squarefree_window(bounds[i], bounds[i + 1], sieve,
                                           max_value=cap_i, max_count=max_count))
    total = math.prod(len(c) for c in per_coord)
    if total > max_count:
        raise BudgetExceeded(required_bits=total, budget_bits=max_count)

    def rec(prefix: tuple[int, ...], level: int):
        if level == k:
            yield SquarefreeTuple(a=prefix, t=bounds)
            return
        for a in per_coord[level]:
            yield from rec(prefix + (a,), level + 1)

    yield from rec((), 0)


@dataclass(frozen=True)
class VolumeSumResult:
    value: float
    tuples: int


def volume_harmonic_sum(t: Sequence[float], caps: Sequence[float] | None, sieve: PrimeSieve,
                        chain_cap: int = DEFAULT_CHAIN_CAP,
                        max_count: int = 2**22) -> VolumeSumResult:
    """Sum of volume(a) / (a_1*...*a_k) over the (capped) window tuples."""
    total = 0.0
    n = 0
    for tup in window_tuples(t, caps, sieve, max_count=max_count):
        total += chain_volume(tup, sieve, cap=chain_cap) / math.prod(tup.a)
        n += 1
    return VolumeSumResult(value=total, tuples=n)


def default_caps(t: Sequence[float]) -> tuple[float, ...]:
    """Stand-in truncation caps_i = t_i^3 for the window-tuple sums."""
    return tuple(float(v) ** 3 for v in t)


def local_global_ratio(x: float, y: Sequence[float], sieve: PrimeSieve,
                       caps: Sequence[float] | None = None,
                       chain_cap: int = DEFAULT_CHAIN_CAP,
                       method: str = "auto") -> dict:
    """Measured density of window hits against the global volume-weighted sum.

    lhs = count_localized(x, y, 2y)/x; rhs multiplies the volume sum by
    prod_i (log y_i / log y_{i-1})^-(k-i+2) with the y_0 = 3 convention.
    """
    y = tuple(float(v) for v in y)
    k = len(y)
    spec = TableSpec(x=x, y=y, z=tuple(2 * v for v in y))
    if caps is None:
        caps = default_caps(y)
    lhs = count_localized(x, y, [2 * v for v in y], sieve, method=method) / x
    factor = 1.0
    prev = 3.0
    for i, yi in enumerate(y):
        factor *= (math.log(yi) / math.log(prev)) ** (-(k - i + 1))
        prev = yi
    s = volume_harmonic_sum(y, caps, sieve, chain_cap=chain_cap)
    rhs = factor * s.value
    return {
        "lhs": lhs,
        "rhs": rhs,
        "ratio": lhs / rhs if rhs else math.inf,
        "admissible": spec.admissible,
        "sum_value": s.value,
        "sum_tuples": s.tuples,
        "caps": tuple(caps),
    }
