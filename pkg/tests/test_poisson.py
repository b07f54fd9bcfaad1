import math

import numpy as np
import pytest

from multtable.poisson import (
    PoissonSpec,
    slab_bound_log_shape,
    slab_bound_shape,
    slab_partition,
    slab_prob,
    solve_tilt,
    upper_tail_bound,
    upper_tail_weighted,
)

from oracles import brute_force_slab


def random_spec(rng, k=None, z_hi=4.0):
    k = k or int(rng.integers(1, 4))
    return PoissonSpec(
        z=tuple(float(v) for v in rng.uniform(1.0, z_hi, size=k)),
        lam=tuple(float(v) for v in rng.uniform(0.5, 2.0, size=k)),
    )


class TestSpec:
    def test_rejects_small_means(self):
        with pytest.raises(ValueError):
            PoissonSpec(z=(0.5,), lam=(1.0,))

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            PoissonSpec(z=(1.0,), lam=(0.0,))

    def test_derived_fields(self):
        spec = PoissonSpec(z=(1.0, 2.0), lam=(1.0, 3.0))
        assert spec.k == 2
        assert spec.big_lambda == 3.0
        assert spec.mean == 7.0


class TestSolveTilt:
    def test_identity_point(self):
        spec = PoissonSpec(z=(1.0,), lam=(1.0,))
        alpha, residual = solve_tilt(spec, 1.0)
        assert alpha == pytest.approx(0.0, abs=1e-12)
        assert residual < 1e-12

    def test_unit_step(self):
        spec = PoissonSpec(z=(1.0,), lam=(1.0,))
        alpha, _ = solve_tilt(spec, math.e)
        assert alpha == pytest.approx(1.0, abs=1e-12)

    def test_two_dimensional_root(self):
        spec = PoissonSpec(z=(1.0, 1.0), lam=(1.0, 2.0))
        alpha, residual = solve_tilt(spec, 5.0)
        assert residual < 1e-12
        back = sum(l * math.exp(alpha * l) * z for l, z in zip(spec.lam, spec.z))
        assert back == pytest.approx(5.0, rel=1e-12)

    def test_residual_grid(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            spec = random_spec(rng)
            r = float(rng.uniform(spec.big_lambda, 40 * spec.mean))
            _, residual = solve_tilt(spec, r)
            assert residual < 1e-12


class TestSlabProb:
    def test_single_point_slab(self):
        spec = PoissonSpec(z=(1.0,), lam=(1.0,))
        res = slab_prob(spec, 1.0)
        assert res.value == pytest.approx(math.exp(-1), rel=1e-12)
        assert res.hypothesis_ok

    def test_matches_brute_force(self):
        rng = np.random.default_rng(22)
        for _ in range(15):
            spec = random_spec(rng, z_hi=3.0)
            r = float(rng.uniform(spec.big_lambda, 3 * spec.mean))
            expected = brute_force_slab(spec.z, spec.lam, r)
            got = slab_prob(spec, r)
            assert got.value == pytest.approx(expected, rel=1e-10, abs=1e-12)
            assert got.error_bound < 1e-12

    def test_decreasing_beyond_mode(self):
        spec = PoissonSpec(z=(1.0,), lam=(1.0,))
        probs = [slab_prob(spec, float(r)).value for r in range(3, 12)]
        assert all(a > b for a, b in zip(probs, probs[1:]))

    def test_hypothesis_flag(self):
        spec = PoissonSpec(z=(1.0,), lam=(2.0,))
        res = slab_prob(spec, 1.0)
        assert not res.hypothesis_ok
        assert res.value >= 0

    def test_log_value_far_tail(self):
        # far slabs underflow in linear space but keep a finite log value
        spec = PoissonSpec(z=(1.0, 1.0), lam=(1.0, 1.0))
        res = slab_prob(spec, 600.0)
        assert res.value == 0.0
        assert -4000 < res.log_value < -600

    def test_monte_carlo_agrees(self):
        spec = PoissonSpec(z=(2.0, 3.0), lam=(1.0, 0.7))
        exact = slab_prob(spec, 6.0)
        est = slab_prob(spec, 6.0, mode="monte_carlo", n=200_000, seed=5)
        assert abs(est.value - exact.value) < 4 * est.error_bound

    def test_monte_carlo_seed_deterministic(self):
        spec = PoissonSpec(z=(2.0,), lam=(1.0,))
        a = slab_prob(spec, 3.0, mode="monte_carlo", n=50_000, seed=9)
        b = slab_prob(spec, 3.0, mode="monte_carlo", n=50_000, seed=9)
        assert a.value == b.value


class TestBoundShape:
    def test_unit_value(self):
        spec = PoissonSpec(z=(1.0,), lam=(1.0,))
        assert slab_bound_shape(spec, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_decreasing_beyond_mean(self):
        spec = PoissonSpec(z=(2.0, 1.0), lam=(1.0, 1.5))
        vals = [slab_bound_log_shape(spec, r) for r in np.linspace(spec.mean, 20 * spec.mean, 12)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_symmetric_under_swap(self):
        a = PoissonSpec(z=(1.0, 3.0), lam=(0.8, 1.1))
        b = PoissonSpec(z=(3.0, 1.0), lam=(1.1, 0.8))
        assert slab_bound_shape(a, 7.0) == pytest.approx(slab_bound_shape(b, 7.0), rel=1e-12)

    def test_dominates_slab_up_to_constant(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            spec = random_spec(rng)
            r = float(rng.uniform(spec.big_lambda, 20 * spec.mean))
            log_ratio = slab_prob(spec, r).log_value - slab_bound_log_shape(spec, r)
            assert log_ratio < math.log(50)


class TestPartition:
    def test_near_one(self):
        rng = np.random.default_rng(24)
        for _ in range(8):
            spec = random_spec(rng, z_hi=20.0)
            out = slab_partition(spec)
            assert abs(out["total"] - 1.0) <= max(1e-9, 10 * out["error_budget"])

    def test_atom_plus_slabs_is_everything(self):
        spec = PoissonSpec(z=(1.5,), lam=(1.0,))
        out = slab_partition(spec)
        assert out["total"] == pytest.approx(1.0, abs=1e-9)


class TestTails:
    def test_upper_tail_bound_decreases(self):
        spec = PoissonSpec(z=(2.0, 2.0), lam=(1.0, 1.0))
        vals = [upper_tail_bound(spec, t) for t in (6.0, 10.0, 20.0, 40.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_weighted_tail_against_direct(self):
        spec = PoissonSpec(z=(1.5,), lam=(1.0,))
        big_z = 6.0
        direct = sum(
            (1 + r - big_z) * math.exp(-1.5 + r * math.log(1.5) - math.lgamma(r + 1))
            for r in range(6, 200)
        )
        got, err = upper_tail_weighted(spec, big_z, power=1.0)
        assert got == pytest.approx(direct, rel=1e-9)

    def test_weighted_tail_controlled_by_slab(self):
        # with lam_i below mu_i the weighted tail is a bounded multiple of the slab
        rng = np.random.default_rng(25)
        for _ in range(10):
            k = int(rng.integers(1, 4))
            lam = rng.uniform(0.5, 1.5, size=k)
            mu = lam * rng.uniform(1.3, 2.0, size=k)
            z = rng.uniform(1.0, 4.0, size=k)
            spec = PoissonSpec(z=tuple(map(float, z)), lam=tuple(map(float, lam)))
            big_z = float(mu @ z)
            if big_z < spec.big_lambda:
                continue
            tail, _ = upper_tail_weighted(spec, big_z, power=1.0)
            slab = slab_prob(spec, big_z).value
            assert tail <= 4000 * slab
