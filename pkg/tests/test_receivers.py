import numpy as np
import pytest

from secsense import (
    RadarScene,
    Reflector,
    RicianRef,
    SecureAcfSpec,
    alice_mf,
    alice_rf,
    db,
    default_grid,
    draw_symbols,
    equal_allocation,
    eve_mf,
    integrate_profiles,
    rd_map,
    sensing_snapshot,
    snr_loss_closed_form,
    structured_allocation,
)
from secsense.receivers import (
    artificial_peak_bins,
    estimate_output_snr,
    eve_processing,
    measure_snr_loss,
    profile_rows_csv,
)
from secsense.scene import OfdmGrid
from secsense.util import derive_seed, rng_from_seed


class TestAliceFilters:
    def test_mf_peaks_at_target_bin(self, grid256, qpsk):
        scene = RadarScene(
            grid=grid256,
            targets=(Reflector(amplitude=1.0, delay_s=10.0 / (grid256.n * grid256.delta_f_hz)),),
        )
        alloc = equal_allocation(grid256.n)
        block = draw_symbols(qpsk, 1, grid256.n, seed=3)
        snap = sensing_snapshot(scene, alloc, block, 0.0, seed=4)
        rows = alice_mf(snap, alloc, block)
        assert np.argmax(np.abs(rows[0])) == 10

    def test_mf_artificial_peaks(self, qpsk):
        """Comb waveform paints ghost peaks at multiples of N/kappa bins."""
        grid = OfdmGrid(n=64, n_cp=16, bandwidth_hz=50e6, m_sym=1)
        alloc = structured_allocation(SecureAcfSpec(0.75, 3), 64)
        scene = RadarScene(grid=grid, targets=(Reflector(amplitude=1.0, delay_s=0.0),))
        ones = np.ones((1, 64), dtype=complex)
        snap = sensing_snapshot(scene, alloc, ones, 0.0, seed=1)
        profile = alice_mf(snap, alloc, ones)[0]
        assert np.abs(profile[0]) == pytest.approx(np.sqrt(64) * 64 / 64, abs=1e-9)
        for peak in (16, 32, 48):
            ratio = np.abs(profile[peak]) / np.abs(profile[0])
            assert ratio == pytest.approx(0.75, abs=1e-9)

    def test_rf_equals_mf_for_unit_modulus(self, grid256, qpsk):
        scene = RadarScene(
            grid=grid256, targets=(Reflector(amplitude=0.5, delay_s=grid256.delay_for_range(60.0)),)
        )
        alloc = equal_allocation(grid256.n)
        block = draw_symbols(qpsk, 4, grid256.n, seed=8)
        snap = sensing_snapshot(scene, alloc, block, 1.0, seed=9)
        assert np.allclose(alice_mf(snap, alloc, block), alice_rf(snap, alloc, block), atol=1e-10)

    def test_rf_removes_waveform_structure(self, grid256, qam16):
        """Noiseless RF output depends only on the channel."""
        scene = RadarScene(
            grid=grid256, targets=(Reflector(amplitude=1.0, delay_s=grid256.delay_for_range(90.0)),)
        )
        alloc_a = equal_allocation(grid256.n)
        alloc_b = structured_allocation(SecureAcfSpec(0.75, 3), grid256.n)
        out = []
        for alloc, seed in ((alloc_a, 1), (alloc_b, 2)):
            block = draw_symbols(qam16, 2, grid256.n, seed=seed)
            snap = sensing_snapshot(scene, alloc, block, 0.0, seed=3)
            out.append(alice_rf(snap, alloc, block))
        assert np.allclose(out[0], out[1], atol=1e-9)
        reference = np.sqrt(grid256.n) * np.fft.ifft(scene.channel())
        assert np.allclose(out[0][0], reference, atol=1e-9)


class TestEveFilters:
    def test_perfect_reference_matches_alice_mf(self, grid256, qam16):
        scene = RadarScene(
            grid=grid256, targets=(Reflector(amplitude=1.0, delay_s=grid256.delay_for_range(45.0)),)
        )
        alloc = structured_allocation(SecureAcfSpec(0.5, 3), grid256.n)
        block = draw_symbols(qam16, 2, grid256.n, seed=5)
        snap = sensing_snapshot(scene, alloc, block, 1.0, seed=6)
        ref = RicianRef(k_factor=np.inf, gain=4.0, noise_var=0.0)
        refframe = 2.0 * alloc.amplitudes()[None, :] * block.symbols
        assert np.allclose(
            eve_mf(snap, refframe), 2.0 * alice_mf(snap, alloc, block), atol=1e-10
        )
        del ref

    def test_ghost_ranges_in_eve_profile(self, grid256, qpsk):
        """Target at 100 m spawns ghosts every r_max/kappa = 192 m."""
        alloc = structured_allocation(SecureAcfSpec(0.75, 3), grid256.n)
        scene = RadarScene(
            grid=grid256, targets=(Reflector(amplitude=1.0, delay_s=grid256.delay_for_range(100.0)),)
        )
        block = draw_symbols(qpsk, 8, grid256.n, seed=3)
        ref = RicianRef(k_factor=np.inf, gain=1.0, noise_var=0.0)
        rows = eve_processing(scene, alloc, block, ref, 0.0, seed=1, filter_kind="MF")
        profile = np.abs(integrate_profiles(rows, grid256).bins)
        true_bin = int(round(grid256.bin_for_range(100.0)))
        ghost_bins = artificial_peak_bins(alloc, true_bin)
        # ghosts at (100 m rounded to bin 33) + {192, 384, 576} m offsets
        assert list(grid256.range_axis_m()[ghost_bins].round()) == [291.0, 483.0, 675.0]
        main = profile[true_bin]
        for g in ghost_bins:
            window = profile[g - 1 : g + 2].max()
            assert db(window**2 / main**2) > -2.5 - 3.0

    def test_eve_rf_perfect_reference_equals_alice_rf(self, grid256, qam16):
        from secsense.receivers import eve_rf

        scene = RadarScene(
            grid=grid256, targets=(Reflector(amplitude=1.0, delay_s=0.0),)
        )
        alloc = equal_allocation(grid256.n)
        block = draw_symbols(qam16, 2, grid256.n, seed=5)
        snap = sensing_snapshot(scene, alloc, block, 1.0, seed=6)
        refframe = alloc.amplitudes()[None, :] * block.symbols
        assert np.allclose(eve_rf(snap, refframe), alice_rf(snap, alloc, block), atol=1e-10)


class TestRangeDoppler:
    def test_static_target_zero_doppler(self, qpsk):
        grid = default_grid(m_sym=32)
        scene = RadarScene(grid=grid, targets=(Reflector(amplitude=1.0, delay_s=0.0),))
        alloc = equal_allocation(grid.n)
        block = draw_symbols(qpsk, grid.m_sym, grid.n, seed=1)
        snap = sensing_snapshot(scene, alloc, block, 0.01, seed=2)
        rows = alice_mf(snap, alloc, block)
        rdm = rd_map(rows, grid)
        peak_range, peak_dop = np.unravel_index(np.argmax(np.abs(rdm.cells)), rdm.cells.shape)
        assert peak_range == 0
        assert rdm.doppler_axis_hz[peak_dop] == 0.0

    def test_zero_doppler_cut_is_scaled_coherent_mean(self, qpsk):
        grid = default_grid(m_sym=8)
        scene = RadarScene(grid=grid, targets=(Reflector(amplitude=1.0, delay_s=0.0),))
        alloc = equal_allocation(grid.n)
        block = draw_symbols(qpsk, grid.m_sym, grid.n, seed=1)
        snap = sensing_snapshot(scene, alloc, block, 0.5, seed=2)
        rows = alice_mf(snap, alloc, block)
        rdm = rd_map(rows, grid)
        mean_profile = integrate_profiles(rows, grid).bins
        assert np.allclose(rdm.zero_doppler_cut(), grid.m_sym * mean_profile, atol=1e-9)

    def test_integration_gain(self, qpsk):
        """32-symbol coherent integration buys ~15 dB of output SNR."""
        grid = default_grid(m_sym=32)
        alloc = equal_allocation(grid.n)
        scene = RadarScene(grid=grid, targets=(Reflector(amplitude=1.0, delay_s=0.0),))
        single, integrated = [], []
        for t in range(150):
            block = draw_symbols(qpsk, grid.m_sym, grid.n, seed=derive_seed(7, t))
            snap = sensing_snapshot(scene, alloc, block, 1.0, seed=derive_seed(8, t))
            rows = alice_mf(snap, alloc, block)
            single.append(rows[0])
            integrated.append(rows.mean(axis=0))
        snr_single = estimate_output_snr(np.stack(single), 0.0)
        snr_int = estimate_output_snr(np.stack(integrated), 0.0)
        assert db(snr_int / snr_single) == pytest.approx(db(32), abs=1.0)

    def test_profile_csv_long_form(self, qpsk):
        grid = default_grid(m_sym=2)
        alloc = equal_allocation(grid.n)
        block = draw_symbols(qpsk, grid.m_sym, grid.n, seed=1)
        scene = RadarScene(grid=grid, targets=(Reflector(amplitude=1.0, delay_s=0.0),))
        snap = sensing_snapshot(scene, alloc, block, 0.1, seed=2)
        rows = alice_mf(snap, alloc, block)
        rdm_rows = profile_rows_csv(rd_map(rows, grid))
        assert len(rdm_rows) == grid.n * grid.m_sym
        prof_rows = profile_rows_csv(integrate_profiles(rows, grid))
        assert len(prof_rows) == grid.n


class TestSnrMetrics:
    def test_lemma_single_symbol_output_snrs(self, qam16):
        """Per-symbol MF/RF output SNRs against the closed forms."""
        grid = OfdmGrid(n=256, n_cp=64, bandwidth_hz=50e6, m_sym=1)
        alloc = structured_allocation(SecureAcfSpec(0.75, 3), grid.n)
        report = measure_snr_loss(alloc, qam16, grid, trials=3000, seed=2, input_snr_db=-20.0)
        gamma_mf_theory = db(grid.n * 0.01)
        assert report.gamma_mf_db == pytest.approx(gamma_mf_theory, abs=0.3)
        loss_theory = db(snr_loss_closed_form(alloc, qam16))
        assert report.gamma_rf_db == pytest.approx(gamma_mf_theory - loss_theory, abs=0.3)

    def test_measured_loss_tracks_theorem(self, qam16):
        grid = OfdmGrid(n=256, n_cp=64, bandwidth_hz=50e6, m_sym=32)
        alloc = structured_allocation(SecureAcfSpec(0.5, 3), grid.n)
        report = measure_snr_loss(alloc, qam16, grid, trials=400, seed=5)
        assert report.loss_db == pytest.approx(db(snr_loss_closed_form(alloc, qam16)), abs=0.3)

    @pytest.mark.parametrize(
        "alpha_frac,num_peaks,loss_db",
        [(0.75, 3, 7.6), (0.5, 3, 4.8), (0.25, 7, 3.6)],
    )
    def test_closed_form_paper_values(self, qam16, alpha_frac, num_peaks, loss_db):
        alloc = structured_allocation(SecureAcfSpec(alpha_frac, num_peaks), 256)
        assert db(snr_loss_closed_form(alloc, qam16)) == pytest.approx(loss_db, abs=0.1)

    def test_equal_power_losses(self, qpsk, qam16):
        alloc = equal_allocation(256)
        assert snr_loss_closed_form(alloc, qpsk) == pytest.approx(1.0, abs=1e-12)
        assert snr_loss_closed_form(alloc, qam16) == pytest.approx(17.0 / 9.0, abs=1e-12)

    def test_estimator_median_matches_mean_for_exponential(self):
        rng = rng_from_seed(11)
        profiles = (rng.standard_normal((4000, 128)) + 1j * rng.standard_normal((4000, 128))) / np.sqrt(2)
        profiles[:, 5] += 30.0
        mean_snr = estimate_output_snr(profiles, 5.0)
        med_snr = estimate_output_snr(profiles, 5.0, noise_estimator="median")
        assert db(mean_snr) == pytest.approx(db(med_snr), abs=0.1)
        with pytest.raises(ValueError):
            estimate_output_snr(profiles, 5.0, noise_estimator="mode")
