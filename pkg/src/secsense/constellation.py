"""Symbol alphabets, their moments, and seeded random symbol generation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownConstellationError
from .util import rng_from_seed

_POWER_TOL = 1e-12


def _square_qam_points(order: int) -> np.ndarray:
    side = int(round(np.sqrt(order)))
    if side * side != order:
        raise ValueError(f"square QAM requires a perfect-square order, got {order}")
    levels = 2.0 * np.arange(side) - (side - 1)
    re, im = np.meshgrid(levels, levels)
    points = (re + 1j * im).ravel()
    return points / np.sqrt(np.mean(np.abs(points) ** 2))


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-average-power symbol alphabet with its amplitude moments.

    mu4 is the kurtosis E|s|^4 and nu_m2 the inverse second moment E|s|^-2,
    both computed over the alphabet. Unit-amplitude alphabets (PSK) have
    mu4 = nu_m2 = 1 exactly.
    """

    points: np.ndarray
    mu4: float
    nu_m2: float
    name: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        amps2 = np.abs(pts) ** 2
        if np.any(amps2 == 0.0):
            raise ValueError("constellation contains a zero-amplitude point")
        if abs(amps2.mean() - 1.0) > _POWER_TOL:
            raise ValueError("constellation is not normalized to unit average power")

    @property
    def order(self) -> int:
        return len(self.points)

    @classmethod
    def from_points(cls, points, name: str = "custom") -> "Constellation":
        pts = np.asarray(points, dtype=complex)
        pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
        mu4 = float(np.mean(np.abs(pts) ** 4))
        nu_m2 = float(np.mean(np.abs(pts) ** -2))
        return cls(points=pts, mu4=mu4, nu_m2=nu_m2, name=name)


@dataclass(frozen=True, eq=False)
class SymbolBlock:
    """Block of i.i.d. symbols, m_sym OFDM symbols by n subcarriers."""

    symbols: np.ndarray
    seed: int

    def __post_init__(self):
        sym = np.asarray(self.symbols, dtype=complex)
        sym.setflags(write=False)
        object.__setattr__(self, "symbols", sym)

    @property
    def m_sym(self) -> int:
        return self.symbols.shape[0]

    @property
    def n(self) -> int:
        return self.symbols.shape[1]


_KNOWN = ("QPSK", "16QAM", "64QAM")


def make_constellation(name: str) -> Constellation:
    """Build one of the supported alphabets (QPSK, 16QAM, 64QAM)."""
    key = name.upper()
    if key == "QPSK":
        points = _square_qam_points(4)
    elif key == "16QAM":
        points = _square_qam_points(16)
    elif key == "64QAM":
        points = _square_qam_points(64)
    else:
        raise UnknownConstellationError(
            f"unknown constellation {name!r}; supported: {', '.join(_KNOWN)}"
        )
    return Constellation.from_points(points, name=key)


def draw_symbols(c: Constellation, m_sym: int, n: int, seed: int) -> SymbolBlock:
    """Draw an i.i.d. uniform [m_sym x n] block from the alphabet.

    Identical (c, m_sym, n, seed) yields a byte-identical block.
    """
    if m_sym < 1 or n < 1:
        raise ValueError("m_sym and n must be >= 1")
    rng = rng_from_seed(seed)
    idx = rng.integers(0, c.order, size=(m_sym, n))
    return SymbolBlock(symbols=c.points[idx], seed=int(seed))
