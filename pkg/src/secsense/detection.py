"""CA-CFAR detection over range profiles and detection-probability sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constellation import Constellation, draw_symbols
from .errors import ConfigError
from .receivers import alice_mf, alice_rf, eve_processing
from .scene import (
    OfdmGrid,
    RadarScene,
    Reflector,
    RicianRef,
    reflector_from_snr,
    sensing_snapshot,
)
from .util import derive_seed
from .waveform import PowerAllocation

RECEIVERS = ("alice_mf", "alice_rf", "eve_mf", "eve_rf")


@dataclass(frozen=True)
class CfarConfig:
    """Cell-averaging CFAR window (cells per side) and false-alarm rate."""

    train_cells: int = 16
    guard_cells: int = 4
    pfa: float = 1e-5

    def __post_init__(self):
        if self.train_cells < 1 or self.guard_cells < 0:
            raise ConfigError("train_cells >= 1 and guard_cells >= 0 required")
        if not 0.0 < self.pfa < 1.0:
            raise ConfigError("pfa must lie in (0, 1)")

    @property
    def n_train_total(self) -> int:
        return 2 * self.train_cells

    @property
    def threshold_factor(self) -> float:
        """Exact CA-CFAR factor for exponential cell powers."""
        nt = self.n_train_total
        return nt * (self.pfa ** (-1.0 / nt) - 1.0)


@dataclass(frozen=True, eq=False)
class DetectionResult:
    detected_bins: np.ndarray
    threshold_profile: np.ndarray

    def __post_init__(self):
        for name in ("detected_bins", "threshold_profile"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _training_mean(powers: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Circular training-cell average for each cell, batched over rows."""
    powers = np.atleast_2d(powers)
    acc = np.zeros_like(powers)
    for d in range(cfg.guard_cells + 1, cfg.guard_cells + cfg.train_cells + 1):
        acc += np.roll(powers, d, axis=1)
        acc += np.roll(powers, -d, axis=1)
    return acc / cfg.n_train_total


def ca_cfar(profile, cfg: CfarConfig) -> DetectionResult:
    """Cell-averaging CFAR with circular windowing on one range profile."""
    bins = getattr(profile, "bins", profile)
    powers = np.abs(np.asarray(bins)) ** 2 if np.iscomplexobj(bins) else np.asarray(bins, dtype=float)
    n = len(powers)
    if n <= 2 * (cfg.train_cells + cfg.guard_cells) + 1:
        raise ConfigError(
            f"CFAR window 2*({cfg.train_cells}+{cfg.guard_cells})+1 does not fit in n={n}"
        )
    threshold = cfg.threshold_factor * _training_mean(powers[None, :], cfg)[0]
    detected = np.flatnonzero(powers > threshold)
    return DetectionResult(detected_bins=detected, threshold_profile=threshold)


def cfar_detect_batch(powers: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Boolean detection mask for a [rows x N] batch of cell powers."""
    powers = np.atleast_2d(np.asarray(powers, dtype=float))
    if powers.shape[1] <= 2 * (cfg.train_cells + cfg.guard_cells) + 1:
        raise ConfigError("CFAR window does not fit the profile length")
    return powers > cfg.threshold_factor * _training_mean(powers, cfg)


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z**2 / trials
    center = (phat + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z**2 / (4 * trials**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class DetectionScenario:
    """Everything but the target SNR for a single-target detection sweep."""

    grid: OfdmGrid
    constellation: Constellation
    alloc: PowerAllocation
    target_range_m: float
    clutter: tuple[Reflector, ...] = ()
    noise_var: float = 1.0
    eve_ref: Optional[RicianRef] = None
    eve_noise_var: Optional[float] = None
    waveform_id: str = "waveform"


@dataclass(frozen=True)
class PdPoint:
    snr_db: float
    pd: float
    ci_low: float
    ci_high: float
    receiver: str
    waveform_id: str


PD_CSV_HEADER = ["snr_db", "pd", "ci_low", "ci_high", "receiver", "waveform_id"]


def _trial_detected(
    scn: DetectionScenario,
    receiver: str,
    snr_db: float,
    trial_seed: int,
    cfg: CfarConfig,
    tolerance_bins: float,
) -> bool:
    grid = scn.grid
    target = reflector_from_snr(grid, scn.target_range_m, snr_db, scn.noise_var)
    scene = RadarScene(grid=grid, targets=(target,), clutter=scn.clutter)
    block = draw_symbols(scn.constellation, grid.m_sym, grid.n, seed=derive_seed(trial_seed, 0))
    if receiver.startswith("alice"):
        snap = sensing_snapshot(scene, scn.alloc, block, scn.noise_var, seed=derive_seed(trial_seed, 1))
        rows = alice_mf(snap, scn.alloc, block) if receiver == "alice_mf" else alice_rf(snap, scn.alloc, block)
    elif receiver.startswith("eve"):
        if scn.eve_ref is None:
            raise ConfigError("eavesdropper receivers need an eve_ref in the scenario")
        noise = scn.noise_var if scn.eve_noise_var is None else scn.eve_noise_var
        rows = eve_processing(
            scene,
            scn.alloc,
            block,
            scn.eve_ref,
            noise,
            seed=derive_seed(trial_seed, 2),
            filter_kind=receiver.split("_")[1],
        )
    else:
        raise ConfigError(f"receiver must be one of {RECEIVERS}, got {receiver!r}")
    integrated = rows.mean(axis=0)
    mask = cfar_detect_batch(np.abs(integrated)[None, :] ** 2, cfg)[0]
    detected = np.flatnonzero(mask)
    true_bin = grid.bin_for_range(scn.target_range_m)
    if len(detected) == 0:
        return False
    dist = np.abs(detected - true_bin)
    dist = np.minimum(dist, grid.n - dist)
    return bool(np.min(dist) <= tolerance_bins + 1e-9)


def pd_curve(
    scn: DetectionScenario,
    receiver: str,
    snr_grid_db: Sequence[float],
    trials: int,
    seed: int,
    cfg: CfarConfig = CfarConfig(),
    tolerance_bins: float = 1.0,
) -> list[PdPoint]:
    """Detection probability vs input target SNR, with Wilson intervals.

    A trial counts as a detection when some CFAR crossing lands within
    `tolerance_bins` of the true target bin (circularly).
    """
    points = []
    for si, snr_db in enumerate(snr_grid_db):
        hits = 0
        for t in range(trials):
            if _trial_detected(scn, receiver, snr_db, derive_seed(seed, si, t), cfg, tolerance_bins):
                hits += 1
        lo, hi = wilson_interval(hits, trials)
        points.append(
            PdPoint(
                snr_db=float(snr_db),
                pd=hits / trials,
                ci_low=lo,
                ci_high=hi,
                receiver=receiver,
                waveform_id=scn.waveform_id,
            )
        )
    return points


def pd_crossing_snr(points: Sequence[PdPoint], level: float = 0.9) -> float:
    """SNR where the Pd curve first crosses `level` (linear interpolation)."""
    snrs = np.asarray([p.snr_db for p in points])
    pds = np.asarray([p.pd for p in points])
    order = np.argsort(snrs)
    snrs, pds = snrs[order], pds[order]
    above = np.flatnonzero(pds >= level)
    if len(above) == 0:
        raise ValueError(f"Pd never reaches {level} on the given SNR grid")
    i = above[0]
    if i == 0:
        return float(snrs[0])
    x0, x1, y0, y1 = snrs[i - 1], snrs[i], pds[i - 1], pds[i]
    if y1 == y0:
        return float(x1)
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
