"""Radar scenes, OFDM grid geometry, and the propagation/communication channels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, IsiRegionError
from .util import rng_from_seed, undb
from .waveform import PowerAllocation

#: Radar convention (3e8 m/s) so the textbook grid constants come out exact.
SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class OfdmGrid:
    """OFDM numerology: N subcarriers, CP length, bandwidth, slow-time depth."""

    n: int
    n_cp: int
    bandwidth_hz: float
    m_sym: int = 1

    @property
    def delta_f_hz(self) -> float:
        return self.bandwidth_hz / self.n

    @property
    def range_bin_m(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def r_max_m(self) -> float:
        """Maximum unambiguous range c*N/(2B)."""
        return self.n * self.range_bin_m

    @property
    def r_max_cp_m(self) -> float:
        """ISI-free range limit c*N_cp/(2B)."""
        return self.n_cp * self.range_bin_m

    @property
    def t_sym_s(self) -> float:
        return (self.n + self.n_cp) / self.bandwidth_hz

    def range_axis_m(self) -> np.ndarray:
        return np.arange(self.n) * self.range_bin_m

    def delay_for_range(self, range_m: float) -> float:
        """Monostatic two-way delay 2R/c."""
        return 2.0 * range_m / SPEED_OF_LIGHT

    def bin_for_range(self, range_m: float) -> float:
        """Fractional range bin 2RB/c."""
        return range_m / self.range_bin_m


def default_grid(m_sym: int = 32) -> OfdmGrid:
    """The 50 MHz / 256-subcarrier / 64-CP working point used throughout."""
    return OfdmGrid(n=256, n_cp=64, bandwidth_hz=50e6, m_sym=m_sym)


@dataclass(frozen=True)
class Reflector:
    """Point reflector: complex amplitude and two-way delay in seconds."""

    amplitude: complex
    delay_s: float
    kind: str = "target"

    def __post_init__(self):
        if self.delay_s < 0:
            raise ValueError("reflector delay must be >= 0")
        if self.kind not in ("target", "clutter"):
            raise ValueError(f"reflector kind must be target|clutter, got {self.kind!r}")


def reflector_from_snr(
    grid: OfdmGrid,
    range_m: float,
    snr_db: float,
    noise_var: float,
    kind: str = "target",
    phase_rad: float = 0.0,
) -> Reflector:
    """Reflector whose input SNR |beta|^2 / noise_var matches snr_db."""
    amp = np.sqrt(undb(snr_db) * noise_var) * np.exp(1j * phase_rad)
    return Reflector(amplitude=amp, delay_s=grid.delay_for_range(range_m), kind=kind)


@dataclass(frozen=True)
class RadarScene:
    """Targets plus clutter as seen from one receiver geometry."""

    grid: OfdmGrid
    targets: tuple[Reflector, ...] = ()
    clutter: tuple[Reflector, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "clutter", tuple(self.clutter))
        max_delay = self.grid.n_cp / self.grid.bandwidth_hz
        for r in self.reflectors:
            if r.delay_s > max_delay * (1.0 + 1e-12):
                raise IsiRegionError(
                    f"reflector delay {r.delay_s:g} s exceeds the ISI-free "
                    f"limit {max_delay:g} s (range {self.grid.r_max_cp_m:g} m)"
                )

    @property
    def reflectors(self) -> tuple[Reflector, ...]:
        return self.targets + self.clutter

    def channel(self) -> np.ndarray:
        """Frequency-domain radar channel sum_i beta_i r(tau_i)."""
        h = np.zeros(self.grid.n, dtype=complex)
        for r in self.reflectors:
            h += r.amplitude * steering(r.delay_s, self.grid)
        return h


def steering(delay_s: float, grid: OfdmGrid) -> np.ndarray:
    """Range steering vector r(tau)[n] = exp(-j 2 pi n delta_f tau)."""
    if delay_s < 0:
        raise ValueError("delay must be >= 0")
    n = np.arange(grid.n)
    return np.exp(-2j * np.pi * n * grid.delta_f_hz * delay_s)


def _as_symbol_matrix(symbols) -> np.ndarray:
    sym = getattr(symbols, "symbols", symbols)
    sym = np.asarray(sym, dtype=complex)
    if sym.ndim == 1:
        sym = sym[None, :]
    return sym


def complex_noise(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    """Circularly symmetric complex Gaussian, var split evenly over re/im."""
    if var == 0.0:
        return np.zeros(shape, dtype=complex)
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sensing_snapshot(
    scene: RadarScene,
    alloc: PowerAllocation,
    symbols,
    noise_var: float,
    seed: int = 0,
) -> np.ndarray:
    """Received frequency-domain frame [m_sym x N]: h . x_m + noise."""
    sym = _as_symbol_matrix(symbols)
    if sym.shape[1] != alloc.n or alloc.n != scene.grid.n:
        raise ValueError("symbols, allocation, and grid sizes must agree")
    x = alloc.amplitudes()[None, :] * sym
    rng = rng_from_seed(seed)
    return scene.channel()[None, :] * x + complex_noise(rng, sym.shape, noise_var)


@dataclass(frozen=True)
class RicianRef:
    """Eavesdropper reference link: Rician K-factor, gain, and noise power."""

    k_factor: float
    gain: float = 1.0
    noise_var: float = 0.0

    def __post_init__(self):
        if self.k_factor < 0 or self.gain <= 0 or self.noise_var < 0:
            raise ValueError("invalid Rician reference parameters")

    @property
    def los_power(self) -> float:
        if np.isinf(self.k_factor):
            return self.gain
        return self.gain * self.k_factor / (self.k_factor + 1.0)

    @property
    def nlos_power(self) -> float:
        if np.isinf(self.k_factor):
            return 0.0
        return self.gain / (self.k_factor + 1.0)

    @property
    def sinr(self) -> float:
        """Reference SINR for unit-mean transmit power."""
        denom = self.nlos_power + self.noise_var
        return np.inf if denom == 0.0 else self.los_power / denom

    @classmethod
    def from_sinr(
        cls, sinr_linear: float, k_factor: float = 1e4, gain: float = 1.0
    ) -> "RicianRef":
        """Pick the reference noise power that realizes a requested SINR."""
        if np.isinf(sinr_linear):
            return cls(k_factor=np.inf, gain=gain, noise_var=0.0)
        los = gain * k_factor / (k_factor + 1.0)
        nlos = gain / (k_factor + 1.0)
        noise_var = los / sinr_linear - nlos
        if noise_var < 0:
            raise ValueError(
                f"requested SINR {sinr_linear:g} exceeds the K-factor ceiling {k_factor:g}"
            )
        return cls(k_factor=k_factor, gain=gain, noise_var=noise_var)


def eve_reference(
    alloc: PowerAllocation,
    symbols,
    ref: RicianRef,
    seed: int = 0,
    nlos_coherence: str = "per_frame",
) -> np.ndarray:
    """Reference frame at the eavesdropper after known-LoS removal.

    The NLoS fade is one draw per frame by default (block fading over the
    frame); "per_symbol" redraws it for every OFDM symbol.
    """
    sym = _as_symbol_matrix(symbols)
    x = alloc.amplitudes()[None, :] * sym
    rng = rng_from_seed(seed)
    if nlos_coherence == "per_frame":
        nlos_shape = (1, alloc.n)
    elif nlos_coherence == "per_symbol":
        nlos_shape = sym.shape
    else:
        raise ConfigError(f"nlos_coherence must be per_frame|per_symbol, got {nlos_coherence!r}")
    nlos = complex_noise(rng, nlos_shape, 1.0) if ref.nlos_power > 0 else 0.0
    noise = complex_noise(rng, sym.shape, ref.noise_var)
    return np.sqrt(ref.los_power) * x + np.sqrt(ref.nlos_power) * nlos * x + noise


@dataclass(frozen=True, eq=False)
class CommChannel:
    """Per-subcarrier complex gains and the receiver noise power."""

    gains: np.ndarray
    noise_var: float = 1.0

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex)
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)
        if not np.all(np.isfinite(gains)):
            raise ValueError("channel gains must be finite")

    @property
    def n(self) -> int:
        return len(self.gains)

    def snr_per_subcarrier(self) -> np.ndarray:
        return np.abs(self.gains) ** 2 / self.noise_var


def flat_channel(n: int, snr_linear: float) -> CommChannel:
    """Flat channel with identical per-subcarrier SNR (unit noise power)."""
    return CommChannel(gains=np.sqrt(snr_linear) * np.ones(n), noise_var=1.0)


def rayleigh_channel(n: int, avg_snr_linear: float, seed: int) -> CommChannel:
    """I.i.d. Rayleigh-fading subcarrier gains with the given mean SNR."""
    rng = rng_from_seed(seed)
    gains = complex_noise(rng, n, avg_snr_linear)
    return CommChannel(gains=gains, noise_var=1.0)


def comm_rate(ch: CommChannel, alloc: PowerAllocation, grid: OfdmGrid) -> float:
    """Achievable rate (bit/s): (B/N) sum log2(1 + |h_i|^2 a_i / sigma^2)."""
    if ch.n != alloc.n:
        raise ValueError("channel and allocation sizes must agree")
    snr = ch.snr_per_subcarrier() * alloc.power
    return grid.bandwidth_hz / grid.n * float(np.sum(np.log2(1.0 + snr)))


def scene_from_json_dict(doc: dict, noise_var: float = 1.0) -> RadarScene:
    """Build a scene from {grid:{...}, targets:[...], clutter:[...]}.

    Reflectors carry either an explicit complex amplitude (amplitude_re/_im)
    or an snr_db that is converted via |beta|^2 = snr * noise_var.
    """
    g = doc["grid"]
    grid = OfdmGrid(
        n=int(g["n"]),
        n_cp=int(g["n_cp"]),
        bandwidth_hz=float(g["bandwidth_hz"]),
        m_sym=int(g.get("m_sym", 1)),
    )

    def parse(entries: Sequence[dict], kind: str) -> list[Reflector]:
        out = []
        for e in entries:
            if "amplitude_re" in e:
                amp = complex(float(e["amplitude_re"]), float(e.get("amplitude_im", 0.0)))
                out.append(
                    Reflector(amplitude=amp, delay_s=grid.delay_for_range(float(e["range_m"])), kind=kind)
                )
            elif "snr_db" in e:
                out.append(
                    reflector_from_snr(grid, float(e["range_m"]), float(e["snr_db"]), noise_var, kind=kind)
                )
            else:
                raise ConfigError(f"{kind} entry needs snr_db or amplitude_re: {e}")
        return out

    return RadarScene(
        grid=grid,
        targets=parse(doc.get("targets", []), "target"),
        clutter=parse(doc.get("clutter", []), "clutter"),
    )
