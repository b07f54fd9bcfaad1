"""Divisor chains and the box unions they trace in log space.

A chain for a tuple (a_1,...,a_k) is a k-tuple (d_1,...,d_k) with
d_1*...*d_i | a_1*...*a_i for every prefix i.  Each chain contributes the
half-open box prod_i [log(d_i/2), log d_i); the Lebesgue measure of the
union of these boxes gauges how much the chains cluster.  All coordinate
comparisons are exact: a bound log d - h*log 2 is stored as the integer
d * 2^(1-h), so shared endpoints (d vs 2d) never suffer float ties.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arith import PrimeSieve, factorize, squarefree_parts
from .errors import EnumerationOverflow, UnsupportedDimension

LOG2 = math.log(2)
DEFAULT_CHAIN_CAP = 2**20
MAX_DIMENSION = 6


@dataclass(frozen=True)
class LogCoordinate:
    """The real number log(d) - halved*log(2), held exactly."""

    d: int
    halved: bool

    @property
    def key(self) -> int:
        # integer 2*d/2^halved; ordering and equality of keys match the reals
        return self.d if self.halved else 2 * self.d

    @property
    def value(self) -> float:
        return math.log(self.key) - LOG2

    def __lt__(self, other: "LogCoordinate") -> bool:
        return self.key < other.key

    def __le__(self, other: "LogCoordinate") -> bool:
        return self.key <= other.key


@dataclass(frozen=True)
class Box:
    """Half-open box prod_i [lo_i, hi_i) with exact log coordinates."""

    lo: tuple[LogCoordinate, ...]
    hi: tuple[LogCoordinate, ...]


@dataclass(frozen=True)
class BoxUnion:
    k: int
    boxes: tuple[Box, ...]

    def __post_init__(self):
        for box in self.boxes:
            if len(box.lo) != self.k or len(box.hi) != self.k:
                raise ValueError("box dimension mismatch")
            if any(l.key >= h.key for l, h in zip(box.lo, box.hi)):
                raise ValueError("boxes must be nonempty (lo < hi on each axis)")


@dataclass(frozen=True)
class SquarefreeTuple:
    """Tuple a = (a_1,...,a_k) with prime supports in nested windows (t_{i-1}, t_i]."""

    a: tuple[int, ...]
    t: tuple[float, ...]  # k+1 window bounds, t_0 <= t_1 <= ... <= t_k

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def windows(self) -> tuple[tuple[float, float], ...]:
        return tuple((self.t[i], self.t[i + 1]) for i in range(self.k))


def squarefree_tuple(a: Sequence[int], t: Sequence[float], sieve: PrimeSieve) -> SquarefreeTuple:
    """Validated constructor: each a_i squarefree with all primes in its window."""
    a = tuple(int(x) for x in a)
    t = tuple(float(x) for x in t)
    if len(t) != len(a) + 1:
        raise ValueError("need k+1 window bounds for a k-tuple")
    if any(t[i] > t[i + 1] for i in range(len(a))):
        raise ValueError("window bounds must be nondecreasing")
    for i, ai in enumerate(a):
        fact = factorize(ai, sieve)
        if not fact.is_squarefree():
            raise ValueError(f"a_{i+1} = {ai} is not squarefree")
        for p, _ in fact.parts:
            if not t[i] < p <= t[i + 1]:
                raise ValueError(f"prime {p} of a_{i+1} outside window ({t[i]}, {t[i+1]}]")
    return SquarefreeTuple(a=a, t=t)


def _coordinates(a) -> tuple[int, ...]:
    return a.a if isinstance(a, SquarefreeTuple) else tuple(int(x) for x in a)


def _prime_placements(a: Sequence[int], sieve: PrimeSieve) -> list[tuple[int, int]]:
    """(coordinate index, prime) pairs; requires a squarefree coprime tuple."""
    seen: set[int] = set()
    placements = []
    for m, am in enumerate(a):
        for p in squarefree_parts(am, sieve):
            if p in seen:
                raise ValueError(f"prime {p} appears in two coordinates")
            seen.add(p)
            placements.append((m, p))
    return placements


def chain_count(a, sieve: PrimeSieve) -> int:
    """Exact number of divisor chains: prod_m (k-m+2)^omega(a_m), 1-based m."""
    coords = _coordinates(a)
    k = len(coords)
    count = 1
    for m, _p in _prime_placements(coords, sieve):
        count *= k - m + 1  # positions m..k-1 (0-based) plus "unused"
    return count


def divisor_chains(a, sieve: PrimeSieve, cap: int = DEFAULT_CHAIN_CAP) -> list[tuple[int, ...]]:
    """All chains (d_1,...,d_k), deterministic order, no duplicates.

    Each prime of a_m may divide exactly one d_i with i >= m, or none;
    enumeration walks these placements prime by prime.
    """
    coords = _coordinates(a)
    k = len(coords)
    placements = _prime_placements(coords, sieve)
    total = 1
    for m, _ in placements:
        total *= k - m + 1
    if total > cap:
        raise EnumerationOverflow(total, cap)
    chains: list[tuple[int, ...]] = [(1,) * k]
    for m, p in placements:
        nxt = []
        for ch in chains:
            nxt.append(ch)  # prime not used by the chain
            for i in range(m, k):
                nxt.append(ch[:i] + (ch[i] * p,) + ch[i + 1 :])
        chains = nxt
    return chains


def chain_count_window(a, y: Sequence[float], z: Sequence[float], sieve: PrimeSieve,
                       cap: int = DEFAULT_CHAIN_CAP) -> int:
    """Chains with y_i < d_i <= z_i on every coordinate."""
    coords = _coordinates(a)
    if len(y) != len(coords) or len(z) != len(coords):
        raise ValueError("window vectors must match the tuple dimension")
    if any(yi >= zi for yi, zi in zip(y, z)):
        raise ValueError("windows must satisfy y_i < z_i")
    hits = 0
    for ch in divisor_chains(coords, sieve, cap=cap):
        if all(yi < di <= zi for di, yi, zi in zip(ch, y, z)):
            hits += 1
    return hits


def build_chain_boxes(a, sieve: PrimeSieve, cap: int = DEFAULT_CHAIN_CAP) -> BoxUnion:
    """One box prod_i [log(d_i/2), log d_i) per chain."""
    coords = _coordinates(a)
    boxes = []
    for ch in divisor_chains(coords, sieve, cap=cap):
        lo = tuple(LogCoordinate(d, True) for d in ch)
        hi = tuple(LogCoordinate(d, False) for d in ch)
        boxes.append(Box(lo=lo, hi=hi))
    return BoxUnion(k=len(coords), boxes=tuple(boxes))


def box_union_volume(union: BoxUnion, max_dim: int = MAX_DIMENSION) -> float:
    """Exact Lebesgue measure of the union via per-axis coordinate compression.

    Cell boundaries are compared as exact integers; floats enter only in the
    final accumulation of cell measures.
    """
    if union.k > max_dim:
        raise UnsupportedDimension(f"dimension {union.k} above cap {max_dim}")
    if not union.boxes:
        return 0.0
    k = union.k
    axis_keys: list[list[int]] = []
    axis_index: list[dict[int, int]] = []
    for i in range(k):
        keys = sorted({b.lo[i].key for b in union.boxes} | {b.hi[i].key for b in union.boxes})
        axis_keys.append(keys)
        axis_index.append({key: j for j, key in enumerate(keys)})
    shape = tuple(len(keys) - 1 for keys in axis_keys)
    covered = np.zeros(shape, dtype=bool)
    for b in union.boxes:
        sl = tuple(
            slice(axis_index[i][b.lo[i].key], axis_index[i][b.hi[i].key]) for i in range(k)
        )
        covered[sl] = True
    vol = covered.astype(np.float64)
    for keys in axis_keys:
        widths = np.diff(np.log(np.asarray(keys, dtype=np.float64)))
        vol = np.tensordot(widths, vol, axes=([0], [0]))
    return float(vol)


def chain_volume(a, sieve: PrimeSieve, cap: int = DEFAULT_CHAIN_CAP) -> float:
    """Volume of the chain box union of a tuple."""
    return box_union_volume(build_chain_boxes(a, sieve, cap=cap))


def chain_volume_bound(a, sieve: PrimeSieve) -> float:
    """Upper bound min{tau * (log 2)^k, prod_i log(2 a_1...a_i)} for the union volume."""
    coords = _coordinates(a)
    k = len(coords)
    tau = chain_count(coords, sieve)
    bound_counting = tau * LOG2**k
    prefix_log = 0.0
    bound_span = 1.0
    for ai in coords:
        prefix_log += math.log(ai)
        bound_span *= prefix_log + LOG2
    return min(bound_counting, bound_span)


def split_volume_bound(a, b, sieve: PrimeSieve, cap: int = DEFAULT_CHAIN_CAP) -> float:
    """Bound tau(a) * volume(b) for the coordinatewise product tuple a*b.

    Requires disjoint prime supports: gcd(prod a_i, prod b_i) = 1.
    """
    ca, cb = _coordinates(a), _coordinates(b)
    if len(ca) != len(cb):
        raise ValueError("tuples must share a dimension")
    pa = math.prod(ca)
    pb = math.prod(cb)
    if math.gcd(pa, pb) != 1:
        raise ValueError("supports must be coprime")
    return chain_count(ca, sieve) * chain_volume(cb, sieve, cap=cap)


def admissible_split_sequences(k: int) -> list[tuple[int, ...]]:
    """Integer sequences z_1 <= ... <= z_k <= k with z_i >= i-1 (z_0=0 implicit)."""
    seqs: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...]):
        i = len(prefix) + 1
        if i > k:
            seqs.append(prefix)
            return
        lo = max(i - 1, prefix[-1] if prefix else 0)
        for z in range(lo, k + 1):
            rec(prefix + (z,))

    rec(())
    return seqs


def divisor_split_bound(a, zseq: Sequence[int], sieve: PrimeSieve) -> float:
    """Volume bound obtained by splitting each coordinate's divisors.

    Sums over sub-divisor tuples d_j | a_j the weight
    prod_j (z_j - j + 1)^omega(d_j) times the minimum of two products: the
    span product prod_{j=0}^{k} log(2 a_1...a_j)^(z_{j+1}-z_j) and
    (log 2)^k prod_j (k - z_j + 1)^omega(a_j/d_j), with 0^0 = 1.  Admissible
    sequences are nondecreasing integers in [i-1, k] (see
    admissible_split_sequences).
    """
    coords = _coordinates(a)
    k = len(coords)
    zseq = tuple(int(z) for z in zseq)
    if len(zseq) != k:
        raise ValueError("z-sequence must have length k")
    if zseq != tuple(sorted(zseq)) or zseq[-1] > k or any(zseq[i] < i for i in range(k)):
        raise ValueError(f"inadmissible z-sequence {zseq}")
    _prime_placements(coords, sieve)  # rejects tuples whose product is not squarefree
    omegas = [len(squarefree_parts(ai, sieve)) for ai in coords]
    zfull = (0,) + zseq + (k,)
    prefix_log = [LOG2]
    for ai in coords:
        prefix_log.append(prefix_log[-1] + math.log(ai))
    span = 1.0
    for j in range(k + 1):
        span *= prefix_log[j] ** (zfull[j + 1] - zfull[j])
    total = 0.0
    for ms in itertools.product(*(range(w + 1) for w in omegas)):
        weight = 1.0
        counting = LOG2**k
        for j in range(k):
            weight *= math.comb(omegas[j], ms[j]) * (zseq[j] - j) ** ms[j]
            counting *= (k - zseq[j] + 1) ** (omegas[j] - ms[j])
        total += weight * min(span, counting)
    return total


def chain_pair_moment(a, p_exponent: float, sieve: PrimeSieve,
                      cap: int = DEFAULT_CHAIN_CAP) -> float:
    """Low-moment sum over chains of (number of log-close chains)^(P-1).

    A chain d' is close to d when |log(d_i'/d_i)| < log 2 on every axis,
    decided exactly as d_i < 2 d_i' and d_i' < 2 d_i; d itself counts.
    """
    if not 1.0 < p_exponent <= 2.0:
        raise ValueError(f"P must lie in (1, 2], got {p_exponent}")
    chains = np.asarray(divisor_chains(a, sieve, cap=cap), dtype=np.int64)
    close = (chains[:, None, :] < 2 * chains[None, :, :]) & (
        chains[None, :, :] < 2 * chains[:, None, :]
    )
    neighbors = close.all(axis=2).sum(axis=1)
    return float(np.sum(neighbors.astype(np.float64) ** (p_exponent - 1.0)))
