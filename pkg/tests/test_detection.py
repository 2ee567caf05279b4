import numpy as np
import pytest

from secsense import CfarConfig, ca_cfar, default_grid, equal_allocation, make_constellation
from secsense.detection import (
    DetectionScenario,
    cfar_detect_batch,
    pd_crossing_snr,
    pd_curve,
    wilson_interval,
)
from secsense.errors import ConfigError
from secsense.scene import RicianRef, reflector_from_snr
from secsense.util import rng_from_seed
from secsense.waveform import SecureAcfSpec, structured_allocation


class TestCfarCore:
    def test_threshold_factor_formula(self):
        cfg = CfarConfig(train_cells=16, guard_cells=4, pfa=1e-5)
        nt = 32
        assert cfg.threshold_factor == pytest.approx(nt * (1e-5 ** (-1 / nt) - 1))
        # the factor is exact for exponential cell powers
        assert (1 + cfg.threshold_factor / nt) ** (-nt) == pytest.approx(1e-5, rel=1e-9)

    def test_false_alarm_rate_on_exponential_noise(self):
        """CFAR self-consistency over ~1e7 Monte-Carlo cells."""
        cfg = CfarConfig(train_cells=16, guard_cells=4, pfa=1e-5)
        rng = rng_from_seed(2024)
        cells = 0
        alarms = 0
        for _ in range(4):
            z = 0.5 * (
                rng.standard_normal((10000, 256)) ** 2
                + rng.standard_normal((10000, 256)) ** 2
            )
            alarms += int(cfar_detect_batch(z, cfg).sum())
            cells += z.size
        rate = alarms / cells
        assert cells >= 10_000_000
        assert 0.3e-5 <= rate <= 3e-5

    def test_strong_target_detected(self):
        rng = rng_from_seed(5)
        power = 0.5 * (rng.standard_normal(256) ** 2 + rng.standard_normal(256) ** 2)
        power[40] = 1000.0  # 30 dB post-integration
        result = ca_cfar(power, CfarConfig())
        assert 40 in result.detected_bins
        assert len(result.threshold_profile) == 256

    def test_accepts_complex_profiles(self):
        rng = rng_from_seed(6)
        bins = (rng.standard_normal(256) + 1j * rng.standard_normal(256)) / np.sqrt(2)
        bins[10] += 40.0
        result = ca_cfar(bins, CfarConfig())
        assert 10 in result.detected_bins

    def test_window_must_fit(self):
        with pytest.raises(ConfigError):
            ca_cfar(np.ones(32), CfarConfig(train_cells=16, guard_cells=4))

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            CfarConfig(train_cells=0)
        with pytest.raises(ConfigError):
            CfarConfig(pfa=1.5)


class TestWilson:
    def test_interval_brackets_proportion(self):
        lo, hi = wilson_interval(90, 100)
        assert lo < 0.9 < hi
        assert 0.0 <= lo and hi <= 1.0

    def test_degenerate_cases(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)
        lo, hi = wilson_interval(0, 50)
        assert lo == 0.0 and hi < 0.15


@pytest.fixture(scope="module")
def detection_setup():
    grid = default_grid(m_sym=32)
    c16 = make_constellation("16QAM")
    clutter = (reflector_from_snr(grid, 30.0, 10.0, 1.0, kind="clutter"),)
    return grid, c16, clutter


class TestPdCurve:
    def test_monotone_within_binomial_error(self, detection_setup):
        grid, c16, clutter = detection_setup
        scn = DetectionScenario(
            grid=grid,
            constellation=c16,
            alloc=equal_allocation(grid.n),
            target_range_m=100.0,
            clutter=clutter,
            waveform_id="plain",
        )
        points = pd_curve(scn, "alice_rf", [-26, -23, -20, -17], trials=150, seed=3)
        for lo, hi in zip(points, points[1:]):
            assert hi.pd >= lo.pd - 3 * np.sqrt(0.25 / 150)

    def test_alice_rf_beats_eve_mf_with_secure_waveform(self, detection_setup):
        grid, c16, clutter = detection_setup
        alloc = structured_allocation(SecureAcfSpec(0.5623, 15), grid.n)  # -5 dB PSL comb
        ref = RicianRef.from_sinr(1.0)
        snrs = [-22.0, -16.0, -10.0]
        common = dict(
            grid=grid,
            constellation=c16,
            alloc=alloc,
            target_range_m=100.0,
            clutter=clutter,
            eve_ref=ref,
            waveform_id="secure",
        )
        scn = DetectionScenario(**common)
        alice = pd_curve(scn, "alice_rf", snrs, trials=120, seed=4)
        eve = pd_curve(scn, "eve_mf", snrs, trials=120, seed=4)
        for a, e in zip(alice, eve):
            assert a.pd >= e.pd

    def test_eve_requires_reference(self, detection_setup):
        grid, c16, clutter = detection_setup
        scn = DetectionScenario(
            grid=grid,
            constellation=c16,
            alloc=equal_allocation(grid.n),
            target_range_m=100.0,
        )
        with pytest.raises(ConfigError):
            pd_curve(scn, "eve_mf", [-10.0], trials=2, seed=1)
        with pytest.raises(ConfigError):
            pd_curve(scn, "bogus", [-10.0], trials=2, seed=1)


class TestCrossing:
    def test_interpolated_crossing(self):
        from secsense.detection import PdPoint

        pts = [
            PdPoint(-20, 0.5, 0, 1, "r", "w"),
            PdPoint(-18, 0.8, 0, 1, "r", "w"),
            PdPoint(-16, 1.0, 0, 1, "r", "w"),
        ]
        assert pd_crossing_snr(pts, 0.9) == pytest.approx(-17.0)
        with pytest.raises(ValueError):
            pd_crossing_snr(pts[:1], 0.9)
