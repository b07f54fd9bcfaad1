"""Sieve-backed integer arithmetic.

Factorization, squarefree tests, divisor and ordered-factorization counts,
and prime reciprocal sums, all driven by a smallest-prime-factor table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

DEFAULT_SIEVE_LIMIT = 10_000_000


@dataclass(frozen=True)
class Factorization:
    """Prime-power decomposition n = prod p^e, primes strictly increasing."""

    n: int
    parts: tuple[tuple[int, int], ...]

    @property
    def largest_prime(self) -> int:
        # convention: P+(1) = 1
        return self.parts[-1][0] if self.parts else 1

    @property
    def smallest_prime(self) -> float:
        # convention: P-(1) = +inf
        return self.parts[0][0] if self.parts else math.inf

    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.parts)

    def divisors(self) -> list[int]:
        """All divisors of n, sorted ascending."""
        divs = [1]
        for p, e in self.parts:
            divs = [d * p**j for d in divs for j in range(e + 1)]
        divs.sort()
        return divs


class PrimeSieve:
    """Smallest-prime-factor table over [2, limit].

    Immutable after construction; factorization is O(log n) per query.
    """

    def __init__(self, limit: int = DEFAULT_SIEVE_LIMIT):
        if limit < 2:
            raise ValueError(f"sieve limit must be >= 2, got {limit}")
        self.limit = int(limit)
        spf = np.zeros(self.limit + 1, dtype=np.int64)
        for p in range(2, math.isqrt(self.limit) + 1):
            if spf[p] == 0:
                block = spf[p * p :: p]
                block[block == 0] = p
        untouched = spf == 0
        spf[untouched] = np.nonzero(untouched)[0]
        spf[0] = 0
        spf.setflags(write=False)
        self._spf = spf
        self._prime_mask = None

    def smallest_factor(self, n: int) -> int:
        self._check_range(n)
        if n == 1:
            raise ValueError("1 has no prime factor")
        return int(self._spf[n])

    def is_prime(self, n: int) -> bool:
        self._check_range(n)
        return n >= 2 and int(self._spf[n]) == n

    def primes_between(self, y: float, z: float) -> np.ndarray:
        """Primes p with y < p <= z, ascending."""
        lo = max(2, math.floor(y) + 1)
        hi = min(self.limit, math.floor(z))
        if hi < lo:
            return np.empty(0, dtype=np.int64)
        mask = self._primes()
        return np.nonzero(mask[lo : hi + 1])[0] + lo

    def _primes(self) -> np.ndarray:
        if self._prime_mask is None:
            idx = np.arange(self.limit + 1, dtype=np.int64)
            mask = self._spf == idx
            mask[:2] = False
            self._prime_mask = mask
        return self._prime_mask

    def primes_list(self) -> np.ndarray:
        if getattr(self, "_prime_list", None) is None:
            self._prime_list = np.nonzero(self._primes())[0]
        return self._prime_list

    def _check_range(self, n: int) -> None:
        if not 1 <= n <= self.limit:
            raise ValueError(f"{n} out of sieve range [1, {self.limit}]")


def build_sieve(limit: int = DEFAULT_SIEVE_LIMIT) -> PrimeSieve:
    return PrimeSieve(limit)


def factorize(n: int, sieve: PrimeSieve) -> Factorization:
    """Factor n using the sieve; factorize(1) has empty parts."""
    sieve._check_range(n)
    parts = []
    spf = sieve._spf
    m = n
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        parts.append((p, e))
    return Factorization(n=n, parts=tuple(parts))


def is_squarefree(n: int, sieve: PrimeSieve) -> bool:
    return factorize(n, sieve).is_squarefree()


def omega(n: int, sieve: PrimeSieve) -> int:
    """Number of distinct prime factors."""
    return len(factorize(n, sieve).parts)


def omega_above(n: int, k: int, sieve: PrimeSieve) -> int:
    """Number of distinct prime factors exceeding k; k=0 recovers omega."""
    return sum(1 for p, _ in factorize(n, sieve).parts if p > k)


def divisors(n: int, sieve: PrimeSieve) -> list[int]:
    return factorize(n, sieve).divisors()


def tau_m(a: int, m: int, sieve: PrimeSieve) -> int:
    """Number of ordered m-tuples (d_1,...,d_m) with d_1*...*d_m = a.

    Multiplicative; equals prod_{p^e || a} C(e+m-1, m-1), so m^omega(a)
    on squarefree a.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    fact = factorize(a, sieve)
    return reduce(lambda acc, pe: acc * math.comb(pe[1] + m - 1, m - 1), fact.parts, 1)


def squarefree_parts(n: int, sieve: PrimeSieve) -> tuple[int, ...]:
    """Prime factors of a squarefree n, ascending; n may exceed the sieve limit.

    Values beyond the limit are reduced by trial division over sieve primes
    until the remainder drops back into sieve range, so products of in-range
    squarefree integers factor cheaply.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n <= sieve.limit:
        fact = factorize(n, sieve)
        if not fact.is_squarefree():
            raise ValueError(f"{n} is not squarefree")
        return tuple(p for p, _ in fact.parts)
    parts = []
    rem = n
    for p in sieve.primes_list():
        p = int(p)
        if p * p > rem or rem <= sieve.limit:
            break
        if rem % p == 0:
            rem //= p
            if rem % p == 0:
                raise ValueError(f"{n} is not squarefree")
            parts.append(p)
    if rem > sieve.limit:
        if rem > sieve.limit**2:
            raise ValueError(f"{n} out of factorization reach for limit {sieve.limit}")
        parts.append(rem)  # no prime factor <= sqrt(rem), so rem is prime
    elif rem > 1:
        tail = factorize(rem, sieve)
        if not tail.is_squarefree():
            raise ValueError(f"{n} is not squarefree")
        parts.extend(p for p, _ in tail.parts)
    parts.sort()
    if len(set(parts)) != len(parts):
        raise ValueError(f"{n} is not squarefree")
    return tuple(parts)


def prime_reciprocal_sum(y: float, z: float, sieve: PrimeSieve) -> float:
    """Sum of 1/p over primes y < p <= z, double precision."""
    if not 1 <= y <= z <= sieve.limit:
        raise ValueError(f"need 1 <= y <= z <= {sieve.limit}, got ({y}, {z})")
    ps = sieve.primes_between(y, z)
    return float(np.sum(1.0 / ps)) if len(ps) else 0.0
