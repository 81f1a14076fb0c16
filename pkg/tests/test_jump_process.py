import math

import numpy as np
import pytest

from specklesim.covariance import CovarianceModel
from specklesim.jump_process import (
    JumpProcessParams,
    PotentialSpec,
    brownian_limit_check,
    brownian_rho,
    rho_estimator,
    sample_increments,
    sample_path,
)

MODEL = CovarianceModel()


def params(eta=0.25):
    return JumpProcessParams(eta=eta, omega0=1.0, model=MODEL)


class TestSampling:
    def test_rate_value(self):
        p = params(0.25)
        assert p.rate == pytest.approx(1.0 / (4 * 0.0625))

    def test_density_normalized(self):
        assert params().density_normalization() == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_interval(self):
        p = params()
        rng = np.random.default_rng(0)
        path = sample_path(p, (0.3,), 1.0, 1.0, rng)
        assert len(path.times) == 0
        assert np.allclose(path.states, [[0.3]])

    def test_jump_count_mean(self):
        p = params(0.25)
        rng = np.random.default_rng(1)
        n = 20000
        counts = np.array([len(sample_path(p, (0.0,), 0.0, 1.0, rng).times) for _ in range(n)])
        lam = p.rate * 1.0
        se = math.sqrt(lam / n)
        assert abs(counts.mean() - lam) < 3 * se

    def test_increment_variance(self):
        p = params(0.25)
        rng = np.random.default_rng(2)
        inc = sample_increments(p, 1.0, 200000, rng)[:, 0]
        target = p.omega0**2 / 4 * MODEL.sigma2 * 1.0
        m2 = np.mean(inc**2)
        se = np.std(inc**2) / math.sqrt(len(inc))
        assert abs(m2 - target) < 3 * se

    def test_disjoint_increments_uncorrelated(self):
        p = params(0.5)
        rng = np.random.default_rng(3)
        n = 30000
        a = np.empty(n)
        b = np.empty(n)
        for i in range(n):
            path1 = sample_path(p, (0.0,), 0.0, 0.5, rng)
            x_half = path1.states[-1][0]
            path2 = sample_path(p, (x_half,), 0.5, 1.0, rng)
            a[i] = x_half
            b[i] = path2.states[-1][0] - x_half
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) < 3 / math.sqrt(n)

    def test_2d_paths(self):
        p = JumpProcessParams(eta=0.3, omega0=1.0, model=CovarianceModel(d=2))
        rng = np.random.default_rng(4)
        inc = sample_increments(p, 1.0, 50000, rng)
        assert inc.shape == (50000, 2)
        target = p.omega0**2 / 4 * p.model.sigma2
        for c in range(2):
            m2 = np.mean(inc[:, c] ** 2)
            se = np.std(inc[:, c] ** 2) / math.sqrt(len(inc))
            assert abs(m2 - target) < 3 * se


class TestRhoEstimator:
    def test_backward_interval_rejected(self):
        p = params()
        with pytest.raises(ValueError):
            rho_estimator(
                p, PotentialSpec(0.0, 1.0, (0.0,)), lambda x: np.ones(x.shape[0]),
                1.0, 0.5, (0.0,), 10, np.random.default_rng(0),
            )

    def test_degenerate_returns_rho0(self):
        p = params()
        rng = np.random.default_rng(0)
        est = rho_estimator(
            p, PotentialSpec(0.5, 1.0, (0.3,)), lambda x: np.exp(-np.sum(x**2, -1)),
            1.0, 1.0, (0.4,), 100, rng,
        )
        assert est.value == pytest.approx(math.exp(-0.16))
        assert est.stderr == 0.0

    def test_zero_potential_unit_terminal(self):
        p = params()
        rng = np.random.default_rng(1)
        est = rho_estimator(
            p, PotentialSpec(0.0, 1.0, (0.0,)), lambda x: np.ones(x.shape[0]),
            0.0, 1.0, (0.0,), 500, rng,
        )
        assert est.value == pytest.approx(1.0)
        assert est.stderr < 1e-14

    def test_constant_potential_pure_phase(self):
        # V == v constant: every path contributes exp(i v (Z - z)) exactly
        p = params()
        rng = np.random.default_rng(2)
        v = 0.7
        const_pot = lambda xi: np.full(xi.shape[:-1], v)
        est = rho_estimator(
            p, const_pot, lambda x: np.ones(x.shape[0]), 0.0, 2.0, (0.7,), 200, rng,
        )
        assert est.value == pytest.approx(np.exp(1j * v * 2.0), rel=1e-12)
        assert est.stderr < 1e-14

    def test_modulus_bound(self):
        p = params(0.2)
        rng = np.random.default_rng(3)
        rho0 = lambda x: 0.8 * np.exp(-0.3 * np.sum(x**2, -1))
        est = rho_estimator(p, PotentialSpec(1.0, 1.0, (0.5,)), rho0, 0.0, 1.5, (0.2,), 2000, rng)
        assert abs(est.value) <= 0.8

    def test_converges_to_brownian_oracle(self):
        p = params(0.1)
        rng = np.random.default_rng(5)
        pot = PotentialSpec(0.5, 1.0, (0.3,))
        rho0 = lambda x: np.exp(-0.5 * np.sum(x**2, -1))
        est = rho_estimator(p, pot, rho0, 0.0, 1.0, (0.2,), 6000, rng)
        oracle = brownian_rho(pot, 0.5, 0.0, 1.0, (0.2,), MODEL.sigma2, 1.0)
        assert abs(est.value - oracle) < 3 * est.stderr

    def test_eta_sweep_approaches_limit(self):
        rng = np.random.default_rng(6)
        pot = PotentialSpec(0.4, 1.0, (0.0,))
        rho0 = lambda x: np.exp(-0.4 * np.sum(x**2, -1))
        oracle = brownian_rho(pot, 0.4, 0.0, 1.0, (0.1,), MODEL.sigma2, 1.0)
        errs = []
        for eta in (0.5, 0.1):
            est = rho_estimator(params(eta), pot, rho0, 0.0, 1.0, (0.1,), 40000, rng)
            errs.append(abs(est.value - oracle))
        assert errs[1] < errs[0]


class TestBrownianOracle:
    def test_free_case_closed_form(self):
        # V = 0: gaussian convolution with variance v*T per component
        v = MODEL.sigma2 / 4
        T, g0, xi = 1.3, 0.6, 0.4
        closed = math.exp(-g0 * xi**2 / (1 + 2 * g0 * v * T)) / math.sqrt(1 + 2 * g0 * v * T)
        got = brownian_rho(PotentialSpec(0.0, 1.0, (0.0,)), g0, 0.0, T, (xi,), MODEL.sigma2, 1.0)
        assert got == pytest.approx(closed, rel=1e-10)

    def test_zero_time_returns_rho0(self):
        got = brownian_rho(PotentialSpec(0.7, 1.0, (0.2,)), 0.5, 1.0, 1.0, (0.3,), 1.0, 1.0, n_ode=1)
        assert got == pytest.approx(math.exp(-0.5 * 0.09))

    def test_2d_factorizes(self):
        pot2 = PotentialSpec(0.5, 1.0, (0.3, 0.3))
        got = brownian_rho(pot2, 0.5, 0.0, 1.0, (0.2, 0.2), 1.0, 1.0, dim=2)
        pot1 = PotentialSpec(0.5, 1.0, (0.3,))
        one = brownian_rho(pot1, 0.5, 0.0, 1.0, (0.2,), 1.0, 1.0, dim=1)
        assert got == pytest.approx(one**2, rel=1e-9)


class TestBrownianLimit:
    def test_variance_and_kurtosis_scan(self):
        rng = np.random.default_rng(7)
        plist = [params(e) for e in (0.5, 0.25, 0.125)]
        entries, monotone = brownian_limit_check(plist, 1.0, 60000, rng)
        for e in entries:
            assert e.var_z < 3.5
            assert abs(e.fourth_cumulant - e.fourth_cumulant_target) < 4 * (
                e.kurtosis_stderr * e.var**2 + 1e-12
            )
        assert monotone
        kurts = [e.excess_kurtosis for e in entries]
        assert kurts[0] > kurts[1] > kurts[2]

    def test_kurtosis_target_formula(self):
        p = params(0.25)
        entries, _ = brownian_limit_check(p, 2.0, 1000, np.random.default_rng(8))
        assert entries[0].kurtosis_target == pytest.approx(3.0 / (p.rate * 2.0))
