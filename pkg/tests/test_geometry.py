import math

import numpy as np
import pytest

from blurfisher.errors import ConfigError, DomainError
from blurfisher.geometry import (
    CONVENTIONS,
    DEFAULT_CONVENTION,
    FrequencyGrid,
    RetinalGeometry,
    SpreadConvention,
    ViewingDistance,
    blur_sigma_px_to_spread_arcmin,
    convention_by_name,
    gamma_from_pixels_per_degree,
    load_config,
    spread_arcmin_to_blur_sigma_px,
)


class TestSpreadConvention:
    def test_default_is_fourier_pair(self):
        assert DEFAULT_CONVENTION.exponent_constant == pytest.approx(math.pi)
        assert DEFAULT_CONVENTION.sigma_to_spread == pytest.approx(math.sqrt(2 * math.pi))

    def test_k_derived_from_c(self):
        # matching exp(-c s^2 rho^2) to exp(-2 pi^2 sigma^2 rho^2)
        for c in (1.0, 2.0, math.pi, 2 * math.pi ** 2):
            conv = SpreadConvention(c)
            assert conv.sigma_to_spread == pytest.approx(math.sqrt(2 * math.pi ** 2 / c))

    def test_sigma_convention_has_unit_k(self):
        assert SpreadConvention.gaussian_sigma().sigma_to_spread == pytest.approx(1.0)

    def test_named_registry(self):
        for name in ("fourier-pair", "unit", "sigma"):
            assert name in CONVENTIONS
            assert convention_by_name(name).exponent_constant > 0
        with pytest.raises(DomainError):
            convention_by_name("bogus")

    @pytest.mark.parametrize("c", [0.0, -1.0, float("nan")])
    def test_invalid_constant(self, c):
        with pytest.raises(DomainError):
            SpreadConvention(c)


class TestRetinalGeometry:
    def test_pitch_is_derived(self):
        g = RetinalGeometry(64, 64)
        assert g.pixel_pitch == pytest.approx(1.0)
        assert g.nyquist_cpd == pytest.approx(30.0)
        g2 = RetinalGeometry(64, 64, receptors_per_degree=120.0)
        assert g2.pixel_pitch == pytest.approx(0.5)
        assert g2.nyquist_cpd == pytest.approx(60.0)

    def test_validation(self):
        with pytest.raises(DomainError):
            RetinalGeometry(0, 64)
        with pytest.raises(DomainError):
            RetinalGeometry(64, 64, receptors_per_degree=0.0)


class TestFrequencyGrid:
    def test_dc_bin(self):
        grid = FrequencyGrid.for_shape((32, 32), 1.0)
        assert grid.rho[0, 0] == 0.0

    def test_conjugate_symmetry_compatibility(self):
        # f(-k) = -f(k) for every non-Nyquist bin: real images stay
        # conjugate-symmetric on this grid
        grid = FrequencyGrid.for_shape((16, 16), 1.0)
        for arr in (grid.f1, grid.f2):
            flipped = -np.roll(arr[::-1, ::-1], (1, 1), axis=(0, 1))
            inner = np.ones_like(arr, dtype=bool)
            inner[8, :] = False
            inner[:, 8] = False
            assert np.allclose(arr[inner], flipped[inner])

    def test_bin_area(self):
        grid = FrequencyGrid.for_shape((32, 64), 0.5)
        assert grid.bin_area == pytest.approx(1.0 / (32 * 64 * 0.25))


class TestGammaFromPixelsPerDegree:
    def test_nominal(self):
        assert gamma_from_pixels_per_degree(60.0) == pytest.approx(1.0)

    def test_table_value(self):
        # pixel density implied by a 0.57 actual/nominal distance ratio
        assert gamma_from_pixels_per_degree(105.26) == pytest.approx(0.57, abs=1e-3)

    def test_half_density(self):
        assert gamma_from_pixels_per_degree(30.0) == pytest.approx(2.0)

    @pytest.mark.parametrize("x", [0.25, 1.0, 3.7, 42.0])
    def test_reciprocal_identity(self, x):
        assert gamma_from_pixels_per_degree(60.0 * x) * x == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -3.0, float("inf"), float("nan")])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            gamma_from_pixels_per_degree(bad)


class TestSpreadConversion:
    geometry = RetinalGeometry(4, 4)

    def test_zero(self):
        assert blur_sigma_px_to_spread_arcmin(0.0, self.geometry) == 0.0

    def test_identity_convention(self):
        conv = SpreadConvention(2 * math.pi ** 2, 1.0)
        assert blur_sigma_px_to_spread_arcmin(2.0, self.geometry, conv) == pytest.approx(2.0)

    def test_fourier_pair_factor(self):
        # matching exp(-pi s^2 rho^2) to the standard-deviation OTF
        # exp(-2 pi^2 sigma^2 rho^2) gives s = sqrt(2 pi) sigma
        s = blur_sigma_px_to_spread_arcmin(2.0, self.geometry, SpreadConvention.fourier_pair())
        assert s == pytest.approx(2.0 * math.sqrt(2.0 * math.pi), rel=1e-12)
        assert s == pytest.approx(5.013, abs=1e-3)

    @pytest.mark.parametrize("k", [0.25, 1.0, math.sqrt(2 * math.pi), 7.5])
    def test_round_trip(self, k):
        conv = SpreadConvention(1.0, k)
        for sigma in (0.1, 1.0, 3.7):
            s = blur_sigma_px_to_spread_arcmin(sigma, self.geometry, conv)
            back = spread_arcmin_to_blur_sigma_px(s, self.geometry, conv)
            assert back == pytest.approx(sigma, rel=1e-12)

    def test_spread_ratio_convention_invariant(self):
        # both spreads produced under the same convention: the ratio
        # cannot depend on the convention constant
        for conv in (SpreadConvention(1.0), SpreadConvention(math.pi)):
            a = blur_sigma_px_to_spread_arcmin(1.3, self.geometry, conv)
            b = blur_sigma_px_to_spread_arcmin(2.6, self.geometry, conv)
            assert a / b == pytest.approx(0.5, rel=1e-12)

    def test_negative_sigma(self):
        with pytest.raises(DomainError):
            blur_sigma_px_to_spread_arcmin(-1.0, self.geometry)


class TestViewingDistance:
    def test_gamma(self):
        vd = ViewingDistance(delta0=2.0, delta=1.0)
        assert vd.gamma == pytest.approx(2.0)

    def test_from_gamma(self):
        assert ViewingDistance.from_gamma(1.754).gamma == pytest.approx(1.754)

    def test_validation(self):
        with pytest.raises(DomainError):
            ViewingDistance(delta0=0.0, delta=1.0)
        with pytest.raises(DomainError):
            ViewingDistance.from_gamma(-1.0)


class TestConfig:
    def test_parse(self, tmp_path):
        p = tmp_path / "conf.txt"
        p.write_text("# comment\nreceptors_per_degree = 60\nc=3.14159\ngamma = 1.66\n")
        cfg = load_config(p)
        assert cfg["receptors_per_degree"] == 60.0
        assert cfg["gamma"] == pytest.approx(1.66)

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "conf.txt"
        p.write_text("mystery = 1\n")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_bad_number(self, tmp_path):
        p = tmp_path / "conf.txt"
        p.write_text("gamma = lots\n")
        with pytest.raises(ConfigError):
            load_config(p)
