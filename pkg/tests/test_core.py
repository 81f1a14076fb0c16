import math

import numpy as np
import pytest

from specklesim.core import (
    QueryOffsets,
    ScalingRegime,
    SourceSpec,
    WaveField,
    build_grid,
    coupling_scale_hint,
    map_offsets,
    map_offsets_inverse,
)


class TestScalingRegime:
    def test_defaults_valid(self):
        r = ScalingRegime()
        assert r.epsilon < r.eta <= 1.0
        assert r.optical_depth == pytest.approx(16.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(epsilon=0.3, eta=0.2),
            dict(epsilon=0.0),
            dict(eta=1.5, epsilon=0.5),
            dict(omega0=0.0),
            dict(z0=-1.0),
            dict(d=3),
        ],
    )
    def test_invalid_regimes_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ScalingRegime(**kwargs)

    def test_soft_notes_mention_coupling_hint(self):
        notes = ScalingRegime().soft_notes()
        assert any("coupling hint" in n for n in notes)

    def test_coupling_hint_value(self):
        # 1 / log|log(0.01)|
        assert coupling_scale_hint(0.01) == pytest.approx(1.0 / math.log(math.log(100.0)))


class TestMapOffsets:
    def test_identity_case(self):
        r = ScalingRegime()
        z, x, w, k = map_offsets(r, QueryOffsets())
        assert (z, x, w, k) == (r.z0, (0.0,), r.omega0, r.k0)

    def test_axial_offset_arithmetic(self):
        r = ScalingRegime(epsilon=0.01, eta=0.2)
        z, *_ = map_offsets(r, QueryOffsets(h=1.0))
        assert z == pytest.approx(r.z0 + 0.002)

    def test_tilt_arithmetic_2d(self):
        r = ScalingRegime(epsilon=0.01, eta=0.2, d=2, k0=(0.0, 0.0))
        *_, k = map_offsets(r, QueryOffsets(kappa=(3.0, 0.0), x=(0.0, 0.0), r=(0.0, 0.0)))
        assert k == pytest.approx((0.03, 0.0))

    @pytest.mark.parametrize("seed", range(6))
    def test_round_trip_is_identity(self, seed):
        rng = np.random.default_rng(seed)
        r = ScalingRegime(epsilon=0.02, eta=0.3, omega0=2.0, k0=(0.4,), z0=1.5)
        q = QueryOffsets(
            h=rng.normal(),
            x=(rng.normal(),),
            Omega=rng.normal(),
            kappa=(rng.normal(),),
            r=(rng.normal(),),
        )
        z, x, w, k = map_offsets(r, q)
        back = map_offsets_inverse(r, z, x, w, k, r=q.r)
        assert back.h == pytest.approx(q.h, abs=1e-9)
        assert back.x == pytest.approx(q.x, abs=1e-9)
        assert back.Omega == pytest.approx(q.Omega, abs=1e-9)
        assert back.kappa == pytest.approx(q.kappa, abs=1e-9)


class TestGrid:
    def test_basic_spacings(self):
        g = build_grid(8, 8.0)
        assert g.spacing == 1.0
        assert np.isclose(np.diff(np.sort(g.xi_axis()))[0], 2 * math.pi / 8)

    def test_fine_grid_spacing(self):
        assert build_grid(256, 51.2).spacing == pytest.approx(0.2)

    @pytest.mark.parametrize("n", [7, 12, 4, 0])
    def test_non_power_of_two_rejected(self, n):
        with pytest.raises(ValueError):
            build_grid(n, 8.0)

    def test_non_positive_length_rejected(self):
        with pytest.raises(ValueError):
            build_grid(16, 0.0)

    def test_nyquist(self):
        g = build_grid(64, 16.0)
        assert g.nyquist == pytest.approx(math.pi / 0.25)
        assert np.max(np.abs(g.xi_axis())) <= g.nyquist + 1e-12

    @pytest.mark.parametrize("d", [1, 2])
    def test_parseval(self, d):
        g = build_grid(32, 12.8)
        rng = np.random.default_rng(3)
        shape = g.shape(d)
        u = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        f = WaveField(u, z=0.0, omega=1.0, k=(0.0,) * d, grid=g)
        uhat = f.fft()
        dxi = 2 * math.pi / g.length
        lhs = np.sum(np.abs(u) ** 2) * g.spacing**d
        rhs = np.sum(np.abs(uhat) ** 2) * dxi**d / (2 * math.pi) ** d
        assert lhs == pytest.approx(rhs, rel=1e-12)


class TestSourceSpec:
    def test_plane_wave_unit_modulus(self):
        s = SourceSpec("plane_wave")
        assert np.all(s.envelope(np.linspace(-5, 5, 11)) == 1.0)

    def test_gaussian_envelope(self):
        s = SourceSpec("gaussian", width=2.0)
        assert s.envelope(np.array([0.0]))[0] == 1.0
        assert s.envelope(np.array([2.0]))[0] == pytest.approx(math.exp(-0.5))

    def test_gamma_check_gaussian(self):
        s = SourceSpec("gaussian", width=1.5)
        # int exp(-r^2/w^2) dr = sqrt(pi) w at k = 0
        assert s.gamma_check(0.0) == pytest.approx(math.sqrt(math.pi) * 1.5)

    def test_gamma_check_plane_wave_raises(self):
        with pytest.raises(ValueError):
            SourceSpec("plane_wave").gamma_check(0.0)

    def test_unknown_profile(self):
        with pytest.raises(ValueError):
            SourceSpec("bessel")
