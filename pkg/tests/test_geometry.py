import math

import numpy as np
import pytest

from multtable.errors import EnumerationOverflow, UnsupportedDimension
from multtable.geometry import (
    Box,
    BoxUnion,
    LogCoordinate,
    admissible_split_sequences,
    box_union_volume,
    build_chain_boxes,
    chain_count,
    chain_count_window,
    chain_pair_moment,
    chain_volume,
    chain_volume_bound,
    divisor_chains,
    divisor_split_bound,
    split_volume_bound,
    squarefree_tuple,
)

from oracles import brute_force_chains, inclusion_exclusion_volume

LOG2 = math.log(2)


def random_tuple(rng, sieve, k, prime_bound=100, max_omega=2, max_chains=2**16):
    primes = [int(p) for p in sieve.primes_between(1, prime_bound)]
    while True:
        pool = list(primes)
        coords = []
        for _ in range(k):
            count = int(rng.integers(0, max_omega + 1))
            idx = rng.choice(len(pool), size=min(count, len(pool)), replace=False)
            picked = [pool[j] for j in sorted(int(i) for i in idx)]
            for p in picked:
                pool.remove(p)
            coords.append(math.prod(picked) if picked else 1)
        tup = tuple(coords)
        if chain_count(tup, sieve) <= max_chains:
            return tup


class TestLogCoordinate:
    def test_value(self):
        assert LogCoordinate(3, False).value == pytest.approx(math.log(3))
        assert LogCoordinate(3, True).value == pytest.approx(math.log(3) - LOG2)

    def test_exact_shared_endpoint(self):
        # log(d) == log(2d) - log(2) must be an exact tie
        assert LogCoordinate(5, False).key == LogCoordinate(10, True).key

    def test_ordering_is_exact(self):
        a = LogCoordinate(7, True)   # log 3.5
        b = LogCoordinate(4, False)  # log 4
        assert a < b and not b < a


class TestChains:
    def test_single_coordinate(self, sieve):
        assert sorted(d[0] for d in divisor_chains((6,), sieve)) == [1, 2, 3, 6]

    def test_pair_example(self, sieve):
        got = sorted(divisor_chains((2, 3), sieve))
        # frozen from the nested-divisibility oracle
        assert sorted(brute_force_chains((2, 3))) == got
        assert got == [(1, 1), (1, 2), (1, 3), (1, 6), (2, 1), (2, 3)]

    def test_identity_tuple(self, sieve):
        assert divisor_chains((1, 1), sieve) == [(1, 1)]

    def test_matches_oracle_random(self, sieve):
        rng = np.random.default_rng(7)
        for _ in range(25):
            k = int(rng.integers(1, 4))
            tup = random_tuple(rng, sieve, k, prime_bound=30, max_omega=2, max_chains=200)
            assert sorted(divisor_chains(tup, sieve)) == sorted(brute_force_chains(tup))

    def test_count_product_formula(self, sieve):
        assert chain_count((2, 3), sieve) == 6  # 3^omega(2) * 2^omega(3)
        assert chain_count((30, 77), sieve) == 3**3 * 2**2

    def test_count_matches_enumeration(self, sieve):
        rng = np.random.default_rng(8)
        for _ in range(20):
            tup = random_tuple(rng, sieve, int(rng.integers(1, 4)), max_chains=5000)
            assert chain_count(tup, sieve) == len(divisor_chains(tup, sieve))

    def test_cap_overflow(self, sieve):
        with pytest.raises(EnumerationOverflow) as err:
            divisor_chains((2 * 3 * 5 * 7 * 11 * 13,), sieve, cap=10)
        assert err.value.chain_count == 2**6

    def test_rejects_non_squarefree(self, sieve):
        with pytest.raises(ValueError):
            divisor_chains((4,), sieve)
        with pytest.raises(ValueError):
            divisor_chains((2, 2), sieve)

    def test_window_count(self, sieve):
        assert chain_count_window((6,), (1,), (2,), sieve) == 1
        assert chain_count_window((6,), (0,), (math.inf,), sieve) == chain_count((6,), sieve)
        got = chain_count_window((2, 3), (1, 1), (2, 3), sieve)
        oracle = sum(
            1 for d in brute_force_chains((2, 3)) if 1 < d[0] <= 2 and 1 < d[1] <= 3
        )
        assert got == oracle


class TestSquarefreeTuple:
    def test_valid(self, sieve):
        tup = squarefree_tuple((2, 15), (1, 2, 30), sieve)
        assert tup.windows == ((1.0, 2.0), (2.0, 30.0))

    def test_rejects_prime_outside_window(self, sieve):
        with pytest.raises(ValueError):
            squarefree_tuple((3, 15), (1, 2, 30), sieve)

    def test_rejects_non_squarefree(self, sieve):
        with pytest.raises(ValueError):
            squarefree_tuple((4,), (1, 10), sieve)

    def test_rejects_unsorted_windows(self, sieve):
        with pytest.raises(ValueError):
            squarefree_tuple((2, 3), (1, 10, 5), sieve)


class TestVolume:
    def test_unit_tuple(self, sieve):
        assert chain_volume((1,), sieve) == pytest.approx(LOG2, abs=1e-15)

    def test_single_prime(self, sieve):
        # two disjoint intervals for any prime p >= 2
        for p in (2, 3, 97):
            assert chain_volume((p,), sieve) == pytest.approx(2 * LOG2, abs=1e-14)

    def test_pair_boxes_match_chains(self, sieve):
        union = build_chain_boxes((2, 3), sieve)
        assert len(union.boxes) == 6

    def test_empty_union(self):
        assert box_union_volume(BoxUnion(k=1, boxes=())) == 0.0

    def test_dimension_cap(self):
        lo = tuple(LogCoordinate(1, True) for _ in range(7))
        hi = tuple(LogCoordinate(1, False) for _ in range(7))
        union = BoxUnion(k=7, boxes=(Box(lo, hi),))
        with pytest.raises(UnsupportedDimension):
            box_union_volume(union)

    def test_against_inclusion_exclusion_random_tuples(self, sieve):
        # inclusion-exclusion walks all 2^boxes subsets, so keep chains <= 12
        rng = np.random.default_rng(11)
        for _ in range(40):
            k = int(rng.integers(1, 4))
            tup = random_tuple(rng, sieve, k, prime_bound=50, max_omega=2, max_chains=12)
            union = build_chain_boxes(tup, sieve)
            float_boxes = [
                (tuple(c.value for c in b.lo), tuple(c.value for c in b.hi))
                for b in union.boxes
            ]
            assert box_union_volume(union) == pytest.approx(
                inclusion_exclusion_volume(float_boxes), abs=1e-12
            )

    def test_random_synthetic_unions(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            k = int(rng.integers(1, 4))
            boxes = []
            for _ in range(int(rng.integers(1, 7))):
                lo, hi = [], []
                for _ in range(k):
                    d1 = int(rng.integers(1, 40))
                    d2 = int(rng.integers(1, 40))
                    c1 = LogCoordinate(d1, bool(rng.integers(0, 2)))
                    c2 = LogCoordinate(d2, bool(rng.integers(0, 2)))
                    if c1.key == c2.key:
                        c2 = LogCoordinate(d2 * 2, c2.halved)
                    a, b = (c1, c2) if c1.key < c2.key else (c2, c1)
                    lo.append(a)
                    hi.append(b)
                boxes.append(Box(tuple(lo), tuple(hi)))
            union = BoxUnion(k=k, boxes=tuple(boxes))
            float_boxes = [
                (tuple(c.value for c in b.lo), tuple(c.value for c in b.hi))
                for b in union.boxes
            ]
            assert box_union_volume(union) == pytest.approx(
                inclusion_exclusion_volume(float_boxes), abs=1e-12
            )


class TestVolumeBounds:
    def test_example_prime(self, sieve):
        assert chain_volume_bound((2,), sieve) == pytest.approx(2 * LOG2)
        assert chain_volume((2,), sieve) == pytest.approx(2 * LOG2)

    def test_example_unit(self, sieve):
        assert chain_volume_bound((1,), sieve) == pytest.approx(LOG2)

    def test_bound_holds_random(self, sieve):
        rng = np.random.default_rng(13)
        for _ in range(100):
            k = int(rng.integers(1, 4))
            tup = random_tuple(rng, sieve, k, prime_bound=50, max_chains=2048)
            assert chain_volume(tup, sieve) <= chain_volume_bound(tup, sieve) + 1e-9

    def test_split_bound(self, sieve):
        rng = np.random.default_rng(14)
        done = 0
        while done < 30:
            k = int(rng.integers(1, 4))
            a = random_tuple(rng, sieve, k, prime_bound=40, max_chains=256)
            b = random_tuple(rng, sieve, k, prime_bound=40, max_chains=256)
            if math.gcd(math.prod(a), math.prod(b)) != 1:
                continue
            ab = tuple(x * y for x, y in zip(a, b))
            assert chain_volume(ab, sieve) <= split_volume_bound(a, b, sieve) + 1e-9
            done += 1

    def test_split_bound_rejects_shared_support(self, sieve):
        with pytest.raises(ValueError):
            split_volume_bound((2,), (6,), sieve)


class TestDivisorSplitBound:
    def test_admissible_sequences_k2(self):
        assert set(admissible_split_sequences(2)) == {(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)}

    def test_full_sequence_reduces_to_counting_bound(self, sieve):
        for tup in ((2, 3), (6, 35), (1, 1)):
            k = len(tup)
            got = divisor_split_bound(tup, (k,) * k, sieve)
            assert got == pytest.approx(chain_count(tup, sieve) * LOG2**k, rel=1e-12)

    def test_minimal_sequence_reduces_to_min_bound(self, sieve):
        for tup in ((2, 3), (6, 35), (10, 21)):
            k = len(tup)
            got = divisor_split_bound(tup, tuple(range(k)), sieve)
            assert got == pytest.approx(chain_volume_bound(tup, sieve), rel=1e-12)

    def test_unit_tuple_floor(self, sieve):
        for zseq in admissible_split_sequences(3):
            assert divisor_split_bound((1, 1, 1), zseq, sieve) >= LOG2**3 - 1e-12

    def test_example_value_dominates_volume(self, sieve):
        bound = divisor_split_bound((2, 3), (1, 2), sieve)
        assert bound > 0
        assert chain_volume((2, 3), sieve) <= bound + 1e-9

    def test_bound_holds_for_all_sequences(self, sieve):
        rng = np.random.default_rng(15)
        for _ in range(25):
            k = int(rng.integers(1, 5))
            tup = random_tuple(rng, sieve, k, prime_bound=50, max_chains=4096)
            vol = chain_volume(tup, sieve)
            for zseq in admissible_split_sequences(k):
                assert vol <= divisor_split_bound(tup, zseq, sieve) + 1e-9

    def test_rejects_inadmissible(self, sieve):
        with pytest.raises(ValueError):
            divisor_split_bound((2, 3), (0, 0), sieve)  # z_2 < 1
        with pytest.raises(ValueError):
            divisor_split_bound((2, 3), (2, 1), sieve)  # decreasing


class TestPairMoment:
    def test_unit(self, sieve):
        assert chain_pair_moment((1,), 2.0, sieve) == pytest.approx(1.0)

    def test_prime_has_no_close_pairs(self, sieve):
        # chains {1, 2}: |log 2| is not strictly below log 2
        for p_exp in (1.25, 1.5, 2.0):
            assert chain_pair_moment((2,), p_exp, sieve) == pytest.approx(2.0)

    def test_limit_to_chain_count(self, sieve):
        rng = np.random.default_rng(16)
        for _ in range(10):
            tup = random_tuple(rng, sieve, int(rng.integers(1, 4)), max_chains=512)
            w = chain_pair_moment(tup, 1 + 1e-9, sieve)
            assert w == pytest.approx(chain_count(tup, sieve), rel=1e-6)

    def test_rejects_bad_exponent(self, sieve):
        with pytest.raises(ValueError):
            chain_pair_moment((2,), 1.0, sieve)

    def test_holder_inequality(self, sieve):
        rng = np.random.default_rng(17)
        for _ in range(20):
            k = int(rng.integers(1, 4))
            group = [random_tuple(rng, sieve, k, max_chains=512) for _ in range(5)]
            for p_exp in (1.25, 1.5, 2.0):
                w = sum(chain_pair_moment(t, p_exp, sieve) / math.prod(t) for t in group)
                lsum = sum(chain_volume(t, sieve) / math.prod(t) for t in group)
                tau = sum(chain_count(t, sieve) / math.prod(t) for t in group)
                lhs = w ** (1 / p_exp) * (lsum / LOG2**k) ** (1 - 1 / p_exp)
                assert lhs >= tau - 1e-9 * max(1.0, tau)


class TestCylinderNesting:
    def test_volume_lower_bound(self, sieve):
        rng = np.random.default_rng(18)
        for _ in range(30):
            k = int(rng.integers(2, 5))
            tup = random_tuple(rng, sieve, k, prime_bound=50, max_chains=2048)
            vol = chain_volume(tup, sieve)
            for merge in range(1, k):
                merged = (math.prod(tup[: merge + 1]),) + tup[merge + 1 :]
                assert vol >= LOG2**merge * chain_volume(merged, sieve) - 1e-9
