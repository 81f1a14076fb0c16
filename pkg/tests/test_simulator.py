import math

import numpy as np
import pytest

from specklesim.core import ScalingRegime, SourceSpec, build_grid
from specklesim.covariance import CovarianceModel
from specklesim.simulator import (
    EnsembleSpec,
    dz_bound,
    init_source,
    make_screen,
    phase_compensate,
    propagate,
    propagate_ensemble,
    propagate_pair_shared_noise,
    realization_rng,
    step,
)


@pytest.fixture
def setup_1d():
    regime = ScalingRegime(epsilon=0.01, eta=0.25)
    grid = build_grid(256, 64.0)
    model = CovarianceModel()
    return regime, grid, model


class TestInitSource:
    def test_plane_wave_is_ones(self, setup_1d):
        regime, grid, _ = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        assert np.allclose(f.values, 1.0)
        assert f.z == 0.0 and f.omega == regime.omega0

    def test_gaussian_envelope_width(self):
        regime = ScalingRegime(epsilon=0.01, eta=0.25)
        grid = build_grid(256, 64.0)
        f = init_source(regime, grid, SourceSpec("gaussian", width=1.0))
        # envelope half-width 1/eps = 100 grid units: decays little over the box
        x = grid.x_axis()
        expected = np.exp(-((0.01 * x) ** 2) / 2)
        assert np.allclose(f.values, expected)

    def test_tilt_beyond_nyquist_rejected(self, setup_1d):
        regime, grid, _ = setup_1d
        with pytest.raises(ValueError):
            init_source(regime, grid, SourceSpec("plane_wave", tilt=(grid.nyquist * 1.01,)))

    def test_tilt_phase_applied(self, setup_1d):
        regime, grid, _ = setup_1d
        k = 2 * math.pi / grid.length * 4
        f = init_source(regime, grid, SourceSpec("plane_wave", tilt=(k,)))
        assert np.allclose(f.values, np.exp(1j * k * grid.x_axis()))


class TestScreens:
    def test_zero_dz_gives_zero_screen(self, setup_1d):
        _, grid, model = setup_1d
        s = make_screen(model, grid, 0.0, realization_rng(0, 0))
        assert np.all(s.values == 0.0)

    def test_screen_is_real_and_centered(self, setup_1d):
        _, grid, model = setup_1d
        vals = make_screen(model, grid, 1e-3, realization_rng(1, 0)).values
        assert vals.dtype == np.float64
        assert abs(vals.mean()) < 5 / math.sqrt(256) * math.sqrt(1e-3)

    def test_ensemble_variance_and_covariance(self, setup_1d):
        # var(dB) ~ dz R(0); cov at lags ell, 2ell ~ dz R(lag), within 3 SE
        _, grid, model = setup_1d
        dz = 2e-3
        M = 10000
        rng = realization_rng(2, 0)
        acc0 = np.zeros(3)
        sq0 = np.zeros(3)
        lags = [0, int(round(1.0 / grid.spacing)), int(round(2.0 / grid.spacing))]
        for _ in range(M):
            v = make_screen(model, grid, dz, rng).values
            for j, lag in enumerate(lags):
                p = float(np.mean(v * np.roll(v, lag)))
                acc0[j] += p
                sq0[j] += p * p
        for j, lag in enumerate(lags):
            mean = acc0[j] / M
            se = math.sqrt((sq0[j] / M - mean**2) / M)
            target = dz * float(model.R(lag * grid.spacing))
            assert abs(mean - target) < 3 * se, (lag, mean, target, se)

    def test_2d_screen_variance(self):
        model = CovarianceModel(d=2)
        grid = build_grid(32, 16.0)
        rng = realization_rng(5, 0)
        dz = 1e-3
        vs = np.stack([make_screen(model, grid, dz, rng).values for _ in range(3000)])
        var = vs.var()
        se = var * math.sqrt(2.0 / (3000 * 32 * 32 / 16))  # rough: correlated cells
        assert abs(var - dz * model.r0) < 4 * se


class TestStep:
    def test_zero_noise_plane_wave_unchanged(self, setup_1d):
        regime, grid, _ = setup_1d
        quiet = CovarianceModel(r0=0.0)
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        out = step(f, quiet, regime, 4e-4, realization_rng(0, 0))
        assert np.allclose(out.values, 1.0, atol=1e-13)

    def test_zero_noise_gaussian_matches_free_solution(self):
        # eps large enough that the beam fits the box comfortably
        regime = ScalingRegime(epsilon=0.2, eta=0.5)
        grid = build_grid(256, 64.0)
        quiet = CovarianceModel(r0=0.0)
        f = init_source(regime, grid, SourceSpec("gaussian", width=1.0))
        z = 1.0
        out = propagate(f, quiet, regime, z, dz=5e-3, rng=realization_rng(0, 0))
        W = 1.0 / regime.epsilon
        T = regime.eta * z / (regime.epsilon * regime.omega0)
        x = grid.x_axis()
        c = W**2 + 1j * T
        exact = W / np.sqrt(c) * np.exp(-(x**2) / (2 * c))
        err = np.sqrt(np.sum(np.abs(out.values - exact) ** 2) * grid.spacing)
        assert err < 1e-8

    def test_energy_conserved_single_step(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        out = step(f, model, regime, 5e-4, realization_rng(3, 0))
        assert abs(out.energy() / f.energy() - 1.0) < 1e-12

    def test_step_bound_enforced(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        bad = dz_bound(regime, grid, model) * 1.5
        with pytest.raises(ValueError):
            step(f, model, regime, bad, realization_rng(0, 0))


class TestPropagate:
    def test_zero_span_is_identity(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        out = propagate(f, model, regime, 0.0, 5e-4, realization_rng(0, 0))
        assert np.array_equal(out.values, f.values)

    def test_backwards_target_rejected(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        f = propagate(f, model, regime, 0.01, 5e-4, realization_rng(0, 0))
        with pytest.raises(ValueError):
            propagate(f, model, regime, 0.005, 5e-4, realization_rng(0, 0))

    def test_same_seed_bit_identical(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        a = propagate(f, model, regime, 0.05, 5e-4, realization_rng(9, 4))
        b = propagate(f, model, regime, 0.05, 5e-4, realization_rng(9, 4))
        assert np.array_equal(a.values, b.values)

    def test_different_streams_differ(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        a = propagate(f, model, regime, 0.05, 5e-4, realization_rng(9, 4))
        b = propagate(f, model, regime, 0.05, 5e-4, realization_rng(9, 5))
        assert not np.allclose(a.values, b.values)

    def test_trace_collection(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        out, trace = propagate(
            f, model, regime, 0.01, 5e-4, realization_rng(1, 1), trace_every=10
        )
        assert len(trace) == 2
        assert trace[0].z == pytest.approx(0.005)

    def test_pathwise_energy_conservation_long_run(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        out = propagate(f, model, regime, 0.25, 5e-4, realization_rng(12, 0))
        assert abs(out.energy() / f.energy() - 1.0) < 1e-10


class TestPhaseCompensate:
    def test_at_origin_equals_source_transform(self, setup_1d):
        regime, grid, model = setup_1d
        f = init_source(regime, grid, SourceSpec("gaussian", width=1.0))
        psi = phase_compensate(f, regime, model)
        assert np.allclose(psi.values, f.fft())

    def test_zero_noise_compensation_is_static(self, setup_1d):
        regime, grid, _ = setup_1d
        quiet = CovarianceModel(r0=0.0)
        f = init_source(regime, grid, SourceSpec("gaussian", width=1.0))
        out = propagate(f, quiet, regime, 0.02, 5e-4, realization_rng(0, 0))
        psi0 = phase_compensate(f, regime, quiet)
        psi1 = phase_compensate(out, regime, quiet)
        assert np.allclose(psi1.values, psi0.values, atol=1e-10 * np.abs(psi0.values).max())

    def test_overflow_guard(self):
        regime = ScalingRegime(epsilon=0.001, eta=0.01)
        grid = build_grid(16, 16.0)
        model = CovarianceModel()
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        f.z = 100.0
        with pytest.raises(ValueError):
            phase_compensate(f, regime, model)


class TestSharedNoise:
    def test_identical_sources_identical_outputs(self, setup_1d):
        regime, grid, model = setup_1d
        fa = init_source(regime, grid, SourceSpec("plane_wave"))
        fb = init_source(regime, grid, SourceSpec("plane_wave"))
        a, b = propagate_pair_shared_noise(
            fa, fb, model, regime, 0.02, 5e-4, realization_rng(4, 0)
        )
        assert np.array_equal(a.values, b.values)

    def test_different_calls_different_screens(self, setup_1d):
        regime, grid, model = setup_1d
        fa = init_source(regime, grid, SourceSpec("plane_wave"))
        fb = init_source(regime, grid, SourceSpec("plane_wave"))
        a1, _ = propagate_pair_shared_noise(
            fa, fb, model, regime, 0.02, 5e-4, realization_rng(4, 0)
        )
        a2, _ = propagate_pair_shared_noise(
            fa, fb, model, regime, 0.02, 5e-4, realization_rng(4, 1)
        )
        assert not np.allclose(a1.values, a2.values)

    def test_grid_mismatch_rejected(self, setup_1d):
        regime, grid, model = setup_1d
        fa = init_source(regime, grid, SourceSpec("plane_wave"))
        fb = init_source(regime, build_grid(128, 64.0), SourceSpec("plane_wave"))
        with pytest.raises(ValueError):
            propagate_pair_shared_noise(fa, fb, model, regime, 0.01, 5e-4, realization_rng(0, 0))


class TestEnsembleRunner:
    def test_matches_literal_propagation(self, setup_1d):
        regime, grid, model = setup_1d
        ens = EnsembleSpec(n_realizations=2, seed=3, batch_size=2)
        for first, blocks in propagate_ensemble(
            regime, grid, model, SourceSpec("plane_wave"), [0.01], 5e-4, ens
        ):
            fast = blocks[0.01]
        f = init_source(regime, grid, SourceSpec("plane_wave"))
        lit = propagate(f, model, regime, 0.01, 5e-4, realization_rng(3, 1))
        assert np.max(np.abs(fast[1, 0] - lit.values)) < 1e-12

    def test_batching_invariance(self, setup_1d):
        regime, grid, model = setup_1d
        res = {}
        for bs in (1, 3):
            ens = EnsembleSpec(n_realizations=4, seed=7, batch_size=bs)
            acc = {}
            for first, blocks in propagate_ensemble(
                regime, grid, model, SourceSpec("plane_wave"), [0.005], 5e-4, ens
            ):
                for i in range(blocks[0.005].shape[0]):
                    acc[first + i] = blocks[0.005][i, 0]
            res[bs] = acc
        for i in range(4):
            assert np.allclose(res[1][i], res[3][i], atol=1e-13)

    def test_range_partition_reproduces_realizations(self, setup_1d):
        regime, grid, model = setup_1d
        ens = EnsembleSpec(n_realizations=3, seed=5, batch_size=8)
        whole = {}
        for first, blocks in propagate_ensemble(
            regime, grid, model, SourceSpec("plane_wave"), [0.005], 5e-4, ens
        ):
            for i in range(blocks[0.005].shape[0]):
                whole[first + i] = blocks[0.005][i, 0]
        part = {}
        for lo, hi in ((0, 1), (1, 3)):
            for first, blocks in propagate_ensemble(
                regime, grid, model, SourceSpec("plane_wave"), [0.005], 5e-4, ens,
                start=lo, stop=hi,
            ):
                for i in range(blocks[0.005].shape[0]):
                    part[first + i] = blocks[0.005][i, 0]
        for i in range(3):
            assert np.array_equal(whole[i], part[i])

    def test_multi_spec_shares_screens(self, setup_1d):
        # two identical specs through the same medium stay identical
        regime, grid, model = setup_1d
        ens = EnsembleSpec(n_realizations=1, seed=11, batch_size=1)
        specs = [SourceSpec("plane_wave"), SourceSpec("plane_wave")]
        for _, blocks in propagate_ensemble(
            regime, grid, model, specs, [0.01], 5e-4, ens
        ):
            u = blocks[0.01]
        assert np.array_equal(u[0, 0], u[0, 1])
