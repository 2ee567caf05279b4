"""Subspace (root-MUSIC) multi-target range estimation and RMSE experiments.

Delays appear as complex exponentials across subcarriers, so range
estimation reduces to frequency estimation on the frequency-domain receiver
outputs: spatially smoothed subcarrier subarrays build the covariance, the
noise-subspace polynomial is rooted, and root angles map back to delays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .constellation import Constellation, draw_symbols
from .errors import ConfigError, EstimationError
from .scene import (
    SPEED_OF_LIGHT,
    OfdmGrid,
    RadarScene,
    Reflector,
    RicianRef,
    eve_reference,
    sensing_snapshot,
)
from .util import derive_seed
from .waveform import PowerAllocation


@dataclass(frozen=True)
class MusicConfig:
    """Root-MUSIC settings: source count, subarray length, averaging flags."""

    num_sources: int
    subarray_len: int
    forward_backward: bool = True
    #: How per-symbol outputs are combined before covariance estimation:
    #: "coherent" averages symbols first (keeps deterministic comb peaks),
    #: "none" treats every symbol as an independent snapshot.
    symbol_averaging: str = "coherent"

    def __post_init__(self):
        if self.num_sources < 1:
            raise ConfigError("num_sources must be >= 1")
        if self.num_sources >= self.subarray_len:
            raise ConfigError("num_sources must be < subarray_len")
        if self.symbol_averaging not in ("coherent", "none"):
            raise ConfigError("symbol_averaging must be coherent|none")


def default_music_config(grid: OfdmGrid, num_sources: int) -> MusicConfig:
    return MusicConfig(num_sources=num_sources, subarray_len=grid.n // 2)


@dataclass(frozen=True)
class RmseReport:
    """Range RMSE per receiver and the eavesdropper-minus-legitimate gap."""

    rmse_alice_m: float
    rmse_eve_m: float
    n_trials: int

    @property
    def gap_m(self) -> float:
        return self.rmse_eve_m - self.rmse_alice_m


RMSE_CSV_HEADER = ["sweep_value", "rmse_alice_m", "rmse_eve_m", "gap_m", "trials"]


def _smoothed_covariance(rows: np.ndarray, m: int, forward_backward: bool) -> np.ndarray:
    """Forward (optionally forward-backward) spatially smoothed covariance."""
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    n = rows.shape[1]
    if m > n:
        raise ConfigError(f"subarray_len {m} exceeds vector length {n}")
    windows = np.lib.stride_tricks.sliding_window_view(rows, m, axis=1)
    snapshots = windows.reshape(-1, m).T
    r = snapshots @ snapshots.conj().T / snapshots.shape[1]
    if forward_backward:
        j = np.eye(m)[::-1]
        r = 0.5 * (r + j @ r.conj() @ j)
    return r


def _root_music_omegas(r: np.ndarray, num_sources: int) -> np.ndarray:
    """Signal frequencies from a covariance matrix via polynomial rooting."""
    m = r.shape[0]
    eigvals, eigvecs = np.linalg.eigh(r)
    if not np.all(np.isfinite(eigvals)):
        raise EstimationError("covariance eigendecomposition failed")
    noise = eigvecs[:, : m - num_sources]
    c = noise @ noise.conj().T
    # coefficient of z^(l+m-1) is the l-th subdiagonal sum of the projector
    coeffs = np.array([np.trace(c, offset=o) for o in range(-(m - 1), m)])
    roots = np.roots(coeffs)
    roots = roots[np.abs(roots) < 1.0]
    if len(roots) < num_sources:
        raise EstimationError(
            f"only {len(roots)} candidate roots inside the unit circle, "
            f"need {num_sources}"
        )
    picked = roots[np.argsort(1.0 - np.abs(roots))[:num_sources]]
    return np.angle(picked)


def root_music_ranges(
    channel_estimates: np.ndarray, cfg: MusicConfig, grid: OfdmGrid
) -> np.ndarray:
    """Estimate `num_sources` target ranges (meters, sorted ascending).

    The steering phase across subcarriers is exp(-j 2 pi n delta_f tau); the
    noise polynomial built from the conjugate-symmetric projector places its
    unit-circle roots at the conjugate frequencies, so a root at angle w
    maps to delay tau = (w mod 2 pi) / (2 pi delta_f).
    """
    rows = np.atleast_2d(np.asarray(channel_estimates, dtype=complex))
    if cfg.symbol_averaging == "coherent" and rows.shape[0] > 1:
        rows = rows.mean(axis=0, keepdims=True)
    r = _smoothed_covariance(rows, cfg.subarray_len, cfg.forward_backward)
    omegas = _root_music_omegas(r, cfg.num_sources)
    delays = np.mod(omegas, 2.0 * np.pi) / (2.0 * np.pi * grid.delta_f_hz)
    return np.sort(delays * SPEED_OF_LIGHT / 2.0)


def circular_range_error(
    est_m: np.ndarray, truth_m: np.ndarray, r_max_m: float
) -> np.ndarray:
    """Nearest-assignment per-target errors on the circular range axis.

    Estimates are matched to truths with the Hungarian algorithm; the error
    metric wraps at the unambiguous range so large aliased mistakes keep
    their full weight.
    """
    est_m = np.asarray(est_m, dtype=float)
    truth_m = np.asarray(truth_m, dtype=float)
    diff = np.abs(est_m[:, None] - truth_m[None, :])
    cost = np.minimum(diff, r_max_m - diff)
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols]


def rf_channel_estimates(snap: np.ndarray, alloc: PowerAllocation, symbols) -> np.ndarray:
    """Frequency-domain reciprocal-filter output (channel + amplified noise)."""
    sym = getattr(symbols, "symbols", symbols)
    x = alloc.amplitudes()[None, :] * np.atleast_2d(np.asarray(sym, dtype=complex))
    return np.atleast_2d(np.asarray(snap)) / x


def eve_mf_estimates(
    scene: RadarScene,
    alloc: PowerAllocation,
    symbols,
    ref: RicianRef,
    surv_noise_var: float,
    seed: int,
) -> np.ndarray:
    """Frequency-domain eavesdropper MF output (surveillance x conj(ref))."""
    surv = sensing_snapshot(scene, alloc, symbols, surv_noise_var, seed=derive_seed(seed, 0))
    refframe = eve_reference(alloc, symbols, ref, seed=derive_seed(seed, 1))
    return surv * np.conj(refframe)


def rmse_experiment(
    scene_sampler: Callable[[int], Sequence[Reflector]],
    alloc: PowerAllocation,
    cfg: MusicConfig,
    trials: int,
    seed: int,
    *,
    grid: OfdmGrid,
    constellation: Constellation,
    noise_var: float = 1.0,
    eve_ref: Optional[RicianRef] = None,
    eve_noise_var: Optional[float] = None,
) -> RmseReport:
    """Monte-Carlo RMSE of Alice (RF estimates) vs Eve (MF estimates).

    `scene_sampler(trial_seed)` returns the per-trial target list; truths are
    taken from the returned reflector delays. Alice runs subspace estimation
    on reciprocal-filter channel estimates; Eve on matched-filter outputs
    built from its noisy reference, which is where comb ghosts leak in.
    """
    if eve_ref is None:
        eve_ref = RicianRef(k_factor=np.inf, gain=1.0, noise_var=0.0)
    sq_alice: list[float] = []
    sq_eve: list[float] = []
    for t in range(trials):
        trial_seed = derive_seed(seed, t)
        targets = tuple(scene_sampler(trial_seed))
        truths = np.array([r.delay_s * SPEED_OF_LIGHT / 2.0 for r in targets])
        scene = RadarScene(grid=grid, targets=targets)
        block = draw_symbols(constellation, grid.m_sym, grid.n, seed=derive_seed(trial_seed, 10))
        snap = sensing_snapshot(scene, alloc, block, noise_var, seed=derive_seed(trial_seed, 11))
        alice_est = root_music_ranges(rf_channel_estimates(snap, alloc, block), cfg, grid)
        eve_freq = eve_mf_estimates(
            scene,
            alloc,
            block,
            ref=eve_ref,
            surv_noise_var=noise_var if eve_noise_var is None else eve_noise_var,
            seed=derive_seed(trial_seed, 12),
        )
        eve_est = root_music_ranges(eve_freq, cfg, grid)
        sq_alice.extend(circular_range_error(alice_est, truths, grid.r_max_m) ** 2)
        sq_eve.extend(circular_range_error(eve_est, truths, grid.r_max_m) ** 2)
    return RmseReport(
        rmse_alice_m=float(np.sqrt(np.mean(sq_alice))),
        rmse_eve_m=float(np.sqrt(np.mean(sq_eve))),
        n_trials=trials,
    )
