import numpy as np
import pytest

from secsense import (
    DivisibilityError,
    FloorError,
    InfeasibleAcfError,
    PowerAllocation,
    SecureAcfSpec,
    equal_allocation,
    ideal_acf_to_allocation,
    secure_acf_comb,
    stochastic_allocation,
    structured_allocation,
)
from secsense.acf import empirical_acf
from secsense.util import rng_from_seed


class TestSecureAcfSpec:
    @pytest.mark.parametrize(
        "alpha_frac,num_peaks,p,q,kappa",
        [(0.75, 3, 3.25, 0.25, 4), (0.5, 3, 2.5, 0.5, 4), (0.25, 7, 2.75, 0.75, 8)],
    )
    def test_paper_parameter_triples(self, alpha_frac, num_peaks, p, q, kappa):
        spec = SecureAcfSpec(alpha_frac=alpha_frac, num_peaks=num_peaks)
        assert spec.p == pytest.approx(p, abs=1e-12)
        assert spec.q == pytest.approx(q, abs=1e-12)
        assert spec.kappa == kappa

    def test_power_conservation_identity(self):
        rng = rng_from_seed(3)
        for _ in range(200):
            spec = SecureAcfSpec(alpha_frac=float(rng.uniform(1e-3, 0.999)),
                                 num_peaks=int(rng.integers(1, 40)))
            assert spec.p + (spec.kappa - 1) * spec.q == pytest.approx(spec.kappa, abs=1e-12)
            assert spec.p > spec.q > 0

    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            SecureAcfSpec(alpha_frac=0.0, num_peaks=3)
        with pytest.raises(ValueError):
            SecureAcfSpec(alpha_frac=1.0, num_peaks=3)

    def test_lambda_requires_divisibility(self):
        spec = SecureAcfSpec(alpha_frac=0.5, num_peaks=2)  # kappa = 3
        with pytest.raises(DivisibilityError):
            spec.lambda_bins(64)
        assert spec.lambda_bins(66) == 22


class TestStructuredAllocation:
    def test_fig4_top(self):
        alloc = structured_allocation(SecureAcfSpec(0.75, 3), 64)
        assert alloc.power.sum() == pytest.approx(64, abs=1e-9)
        assert alloc.power[0] == pytest.approx(3.25)
        assert alloc.power[1] == pytest.approx(0.25)
        assert alloc.structure.kappa == 4

    def test_near_zero_alpha_is_equal_allocation(self):
        alloc = structured_allocation(SecureAcfSpec(1e-12, 3), 64)
        assert np.allclose(alloc.power, 1.0, atol=1e-9)

    def test_divisibility_error(self):
        with pytest.raises(DivisibilityError):
            structured_allocation(SecureAcfSpec(0.5, 2), 64)

    def test_floor_error(self):
        with pytest.raises(FloorError):
            structured_allocation(SecureAcfSpec(1.0 - 1e-6, 3), 64)

    def test_n0_out_of_range(self):
        with pytest.raises(ValueError):
            structured_allocation(SecureAcfSpec(0.75, 3), 64, n0=5)

    @pytest.mark.parametrize("n0", [1, 2, 3, 4])
    def test_shift_places_dominant_set(self, n0):
        alloc = structured_allocation(SecureAcfSpec(0.75, 3), 64, n0=n0)
        assert np.allclose(alloc.power[n0 - 1 :: 4], 3.25)
        assert np.array_equal(alloc.dominant_indices(), np.arange(n0 - 1, 64, 4))


class TestCombInversion:
    @pytest.mark.parametrize(
        "alpha_frac,num_peaks", [(0.75, 3), (0.5, 3), (0.25, 7), (0.9, 1), (0.1, 15)]
    )
    def test_round_trip(self, alpha_frac, num_peaks):
        spec = SecureAcfSpec(alpha_frac, num_peaks)
        direct = structured_allocation(spec, 64)
        inverted = ideal_acf_to_allocation(secure_acf_comb(spec, 64))
        assert np.max(np.abs(direct.power - inverted.power)) < 1e-9
        assert inverted.structure.kappa == spec.kappa

    def test_half_comb_values(self):
        alloc = ideal_acf_to_allocation(secure_acf_comb(SecureAcfSpec(0.5, 3), 64))
        assert alloc.structure.p == pytest.approx(2.5, abs=1e-9)
        assert alloc.structure.q == pytest.approx(0.5, abs=1e-9)

    def test_flat_comb_gives_ones(self):
        acf = np.zeros(64)
        acf[0] = 64.0
        alloc = ideal_acf_to_allocation(acf)
        assert np.allclose(alloc.power, 1.0, atol=1e-12)

    def test_infeasible_comb(self):
        acf = np.zeros(64)
        acf[0] = 64.0
        acf[16] = acf[32] = acf[48] = 80.0  # peaks above the mainlobe
        with pytest.raises(InfeasibleAcfError):
            ideal_acf_to_allocation(acf)

    def test_wrong_mainlobe_rejected(self):
        acf = np.zeros(64)
        acf[0] = 32.0
        with pytest.raises(ValueError):
            ideal_acf_to_allocation(acf)


class TestStochasticAllocation:
    def test_zero_jitter_matches_structured(self):
        spec = SecureAcfSpec(0.75, 3)
        a = structured_allocation(spec, 64)
        b = stochastic_allocation(spec, 64, jitter=0.0, seed=9)
        assert np.array_equal(a.power, b.power)

    def test_seed_determinism(self):
        spec = SecureAcfSpec(0.5, 3)
        a = stochastic_allocation(spec, 64, jitter=0.05, seed=4)
        b = stochastic_allocation(spec, 64, jitter=0.05, seed=4)
        assert np.array_equal(a.power, b.power)
        assert a.power.sum() == pytest.approx(64, abs=1e-9)

    def test_floor_breach(self):
        with pytest.raises(FloorError):
            stochastic_allocation(SecureAcfSpec(0.999, 3), 64, jitter=0.05, seed=1)

    def test_mean_squared_acf_matches_comb(self):
        """Monte-Carlo average over allocation draws vs comb^2 + N*jitter^2."""
        spec = SecureAcfSpec(0.75, 3)
        n, jitter, draws = 64, 0.05, 1000
        ones = np.ones(n, dtype=complex)
        sq = np.empty((draws, n))
        for d in range(draws):
            alloc = stochastic_allocation(spec, n, jitter=jitter, seed=1000 + d)
            sq[d] = empirical_acf(alloc, ones).squared
        # rescaling pins the total power, so the zero lag is exactly N^2
        assert np.allclose(sq[:, 0], float(n) ** 2, atol=1e-8)
        mean_sq = sq.mean(axis=0)[1:]
        band = 3.0 * (sq.std(axis=0) / np.sqrt(draws))[1:]
        expected = (secure_acf_comb(spec, n) ** 2 + n * jitter**2)[1:]
        assert np.all(np.abs(mean_sq - expected) <= band + 1e-9)


class TestPowerAllocation:
    def test_sum_invariant(self):
        with pytest.raises(ValueError):
            PowerAllocation(power=np.ones(8) * 1.1)

    def test_floor_invariant(self):
        power = np.ones(8)
        power[0] = 1e-6
        power[1] = 2.0 - 1e-6
        with pytest.raises(FloorError):
            PowerAllocation(power=power)

    def test_json_round_trip(self):
        alloc = structured_allocation(SecureAcfSpec(0.75, 3), 64, n0=2)
        restored = PowerAllocation.from_json(alloc.to_json())
        assert np.allclose(restored.power, alloc.power)
        assert restored.structure == alloc.structure

    def test_json_without_structure(self):
        alloc = PowerAllocation.from_json('{"n": 4, "power": [1.0, 1.0, 1.0, 1.0]}')
        assert alloc.structure is None
        assert alloc.n == 4

    def test_equal_allocation_tagged(self):
        alloc = equal_allocation(16)
        assert alloc.structure.kappa == 1
        assert alloc.power.sum() == pytest.approx(16)
