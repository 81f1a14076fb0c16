import math

import numpy as np
import pytest

from specklesim.core import ScalingRegime
from specklesim.covariance import CovarianceModel
from specklesim.statistics import (
    MomentRequest,
    estimate_moment,
    factorial_sum_identity,
    first_moment_check,
    gaussian_summation_prediction,
    gaussianity_report,
)


def _circular_gaussian(rng, n, scale=1.0):
    return scale * (rng.normal(size=n) + 1j * rng.normal(size=n)) / math.sqrt(2)


class TestEstimateMoment:
    def test_variance_of_circular_gaussian(self):
        rng = np.random.default_rng(0)
        z = _circular_gaussian(rng, 20000, scale=1.3)
        est = estimate_moment(np.stack([z, z], axis=1), MomentRequest(p=1, q=1))
        assert abs(est.value - 1.3**2) < 3 * est.stderr

    def test_circularity_second_moment_vanishes(self):
        rng = np.random.default_rng(1)
        z = _circular_gaussian(rng, 20000)
        est = estimate_moment(np.stack([z, z], axis=1), MomentRequest(p=2, q=0))
        assert abs(est.value) < 3 * est.stderr

    def test_fourth_moment_doubles(self):
        rng = np.random.default_rng(2)
        z = _circular_gaussian(rng, 40000)
        est = estimate_moment(
            np.stack([z, z, z, z], axis=1), MomentRequest(p=2, q=2)
        )
        assert abs(est.value - 2.0) < 3 * est.stderr

    def test_reorder_invariance(self):
        rng = np.random.default_rng(3)
        z = _circular_gaussian(rng, 4000)
        s = np.stack([z, np.conj(z)], axis=1)
        a = estimate_moment(s, MomentRequest(p=1, q=1))
        perm = rng.permutation(4000)
        b = estimate_moment(s[perm], MomentRequest(p=1, q=1))
        assert a.value == pytest.approx(b.value, rel=1e-12)

    def test_global_phase_covariance(self):
        # mu_{p,p} invariant under a global phase; mu_{2,0} rotates by 2 theta
        rng = np.random.default_rng(4)
        z = _circular_gaussian(rng, 3000) + 0.2
        theta = 0.71
        w = z * np.exp(1j * theta)
        m11a = estimate_moment(np.stack([z, z], axis=1), MomentRequest(1, 1))
        m11b = estimate_moment(np.stack([w, w], axis=1), MomentRequest(1, 1))
        assert m11b.value == pytest.approx(m11a.value, rel=1e-12)
        m20a = estimate_moment(np.stack([z, z], axis=1), MomentRequest(2, 0))
        m20b = estimate_moment(np.stack([w, w], axis=1), MomentRequest(2, 0))
        assert m20b.value == pytest.approx(m20a.value * np.exp(2j * theta), rel=1e-12)

    def test_insufficient_samples(self):
        with pytest.raises(ValueError):
            estimate_moment(np.ones((1, 2), dtype=complex), MomentRequest(1, 1))

    def test_order_cap(self):
        with pytest.raises(ValueError):
            MomentRequest(p=3, q=2)


class TestGaussianSummation:
    def test_single_pair(self):
        m = np.array([[0.3 + 0.1j]])
        assert gaussian_summation_prediction(m) == pytest.approx(0.3 + 0.1j)

    def test_two_by_two(self):
        m = np.array([[1.0, 0.5j], [-0.5j, 2.0]])
        pred = gaussian_summation_prediction(m)
        assert pred == pytest.approx(1.0 * 2.0 + 0.5j * (-0.5j))

    def test_equal_entries_reduce_to_twice_square(self):
        m = 0.7 - 0.2j
        pred = gaussian_summation_prediction(np.full((2, 2), m))
        assert pred == pytest.approx(2 * m**2)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            gaussian_summation_prediction(np.ones((2, 3)))

    def test_three_by_three_against_enumeration(self):
        rng = np.random.default_rng(5)
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        # permanent via cofactor-free brute force over the symmetric group
        import itertools

        brute = sum(
            np.prod([m[j, p[j]] for j in range(3)])
            for p in itertools.permutations(range(3))
        )
        assert gaussian_summation_prediction(m) == pytest.approx(brute)


class TestGaussianityReport:
    def test_synthetic_gaussian_passes(self):
        rng = np.random.default_rng(6)
        n = 20000
        shared = _circular_gaussian(rng, n)
        u1 = (shared + _circular_gaussian(rng, n)) / math.sqrt(2)
        u2 = (shared + _circular_gaussian(rng, n)) / math.sqrt(2)
        rep = gaussianity_report(np.stack([u1, u2], axis=1))
        assert rep.z_mu22 < 3
        assert rep.z_mu21 < 3
        assert rep.z_mu20 < 3
        assert abs(rep.contrast - 1.0) < 0.05

    def test_deterministic_field_detected(self):
        # z = 0 source: no randomness, contrast 0 and strongly non-gaussian
        vals = np.full(2000, 1.0 + 0.0j)
        rep = gaussianity_report(np.stack([vals, vals], axis=1))
        assert rep.contrast == 0.0
        assert rep.z_mu20 > 3 or rep.mu20.stderr == 0.0

    def test_minimum_ensemble_enforced(self):
        with pytest.raises(ValueError):
            gaussianity_report(np.ones((100, 2), dtype=complex))


class TestFirstMomentCheck:
    def test_exact_at_origin(self):
        regime = ScalingRegime()
        model = CovarianceModel()
        samples = np.full(500, 1.0 + 0.0j)
        rep = first_moment_check(samples, regime, model, z=0.0)
        assert rep.measured == pytest.approx(rep.target)

    def test_damping_target_value(self):
        regime = ScalingRegime(epsilon=0.01, eta=0.25)
        model = CovarianceModel()
        rng = np.random.default_rng(7)
        target = math.exp(-1.0 / (8 * 0.25**2))
        samples = target + 0.02 * _circular_gaussian(rng, 4000)
        rep = first_moment_check(samples, regime, model, z=1.0)
        assert rep.z_score < 3

    def test_coherence_suppressed_at_strong_coupling(self):
        # deep diffusive regime: the mean-field target underflows to zero
        regime = ScalingRegime(epsilon=0.001, eta=0.01)
        model = CovarianceModel()
        samples = np.zeros(200, dtype=complex)
        rep = first_moment_check(samples, regime, model, z=1.0)
        assert rep.target == 0.0


class TestFactorialSum:
    def test_zero_constant(self):
        val, n_used, tail = factorial_sum_identity(2, 0.0)
        assert val == 1.0 and n_used == 0

    @pytest.mark.parametrize("p,c", [(1, 0.3), (2, 0.5), (3, 1.0)])
    def test_reaches_exponential(self, p, c):
        val, _, tail = factorial_sum_identity(p, c)
        assert abs(val - math.exp(p * p * c)) < 1e-10
        assert tail < 1e-10

    def test_monotone_from_below(self):
        p, c = 2, 0.4
        target = math.exp(p * p * c)
        prev = 0.0
        for n_max in (1, 2, 4, 8, 16):
            val, _, _ = factorial_sum_identity(p, c, n_max=n_max, tol=0.0)
            assert val >= prev - 1e-15
            assert val <= target + 1e-9
            prev = val
