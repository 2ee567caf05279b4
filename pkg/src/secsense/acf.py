"""Autocorrelation profiles and the PSL/ISL sensing-security metrics.

Profiles use the un-normalized sum convention
    Lambda[k] = sum_n |w_n|^2 |s_n|^2 exp(+j 2 pi k (n-1) / N),
so an equal allocation with unit-amplitude symbols gives an exact N*delta[k]
impulse. Range-profile code uses the unitary IDFT instead; the two differ by
a sqrt(N) factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constellation import Constellation, draw_symbols
from .errors import StructureError
from .util import db
from .waveform import PowerAllocation, SecureAcfSpec


@dataclass(frozen=True, eq=False)
class AcfProfile:
    """ACF across all N lags: complex values and/or their squared magnitudes.

    Expectation profiles (is_expectation=True) carry only `squared`, the
    per-lag expected squared magnitude.
    """

    squared: np.ndarray
    values: Optional[np.ndarray] = None
    is_expectation: bool = False

    def __post_init__(self):
        squared = np.asarray(self.squared, dtype=float)
        squared.setflags(write=False)
        object.__setattr__(self, "squared", squared)
        if self.values is not None:
            values = np.asarray(self.values, dtype=complex)
            values.setflags(write=False)
            object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.squared)


@dataclass(frozen=True)
class SecurityMetrics:
    """Peak and integrated sidelobe levels of the expected squared ACF."""

    psl_linear: float
    isl_linear: float

    @property
    def psl_db(self) -> float:
        return db(self.psl_linear)

    @property
    def isl_db(self) -> float:
        return db(self.isl_linear)


def empirical_acf(alloc: PowerAllocation, symbols: np.ndarray) -> AcfProfile:
    """ACF of one OFDM symbol under the given power allocation."""
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    if len(symbols) != alloc.n:
        raise ValueError(
            f"symbol length {len(symbols)} does not match allocation n={alloc.n}"
        )
    weighted = alloc.power * np.abs(symbols) ** 2
    values = alloc.n * np.fft.ifft(weighted)
    return AcfProfile(squared=np.abs(values) ** 2, values=values, is_expectation=False)


def expected_sq_acf(alloc: PowerAllocation, c: Constellation) -> AcfProfile:
    """Expected squared ACF over random symbols, exact at every lag.

    For a deterministic allocation a_n = |w_n|^2,
        E|Lambda[k]|^2 = (mu4 - 1) sum_n a_n^2 + |sum_n a_n e^{j2pik n/N}|^2.
    The random-signaling pedestal also adds at lag 0, so the mainlobe is
    slightly above N^2; the large-N closed forms drop that term.
    """
    if alloc.structure is None:
        raise StructureError(
            "expected_sq_acf needs a structured allocation; "
            "use monte_carlo_sq_acf for arbitrary allocations"
        )
    deterministic = np.abs(alloc.n * np.fft.ifft(alloc.power)) ** 2
    pedestal = (c.mu4 - 1.0) * float(np.sum(alloc.power**2))
    return AcfProfile(squared=deterministic + pedestal, is_expectation=True)


def monte_carlo_sq_acf(
    alloc: PowerAllocation, c: Constellation, trials: int, seed: int
) -> AcfProfile:
    """Average squared ACF over i.i.d. symbol draws (any allocation)."""
    block = draw_symbols(c, trials, alloc.n, seed)
    weighted = alloc.power[None, :] * np.abs(block.symbols) ** 2
    values = alloc.n * np.fft.ifft(weighted, axis=1)
    mean_sq = np.mean(np.abs(values) ** 2, axis=0)
    return AcfProfile(squared=mean_sq, is_expectation=True)


def psl(profile: AcfProfile) -> float:
    """Peak sidelobe level max_{k!=0} E|Lambda[k]|^2 / E|Lambda[0]|^2."""
    if not profile.is_expectation:
        raise ValueError("psl is defined on expectation profiles")
    return float(np.max(profile.squared[1:]) / profile.squared[0])


def isl(profile: AcfProfile) -> float:
    """Integrated sidelobe level sum_{k!=0} E|Lambda[k]|^2 / E|Lambda[0]|^2."""
    if not profile.is_expectation:
        raise ValueError("isl is defined on expectation profiles")
    return float(np.sum(profile.squared[1:]) / profile.squared[0])


def realized_psl(profile: AcfProfile) -> float:
    """Single-realization PSL, for diagnostics only."""
    return float(np.max(profile.squared[1:]) / profile.squared[0])


def metrics_closed_form(spec: SecureAcfSpec, c: Constellation) -> SecurityMetrics:
    """Large-N closed-form PSL/ISL of the comb allocation.

    PSL = (1 - q)^2 and
    ISL = (kappa - 1)(1 - q)^2 + (mu4 - 1)(p^2/kappa + (1 - 1/kappa) q^2),
    which also satisfy ISL = mu4 (kappa - 1) PSL + (mu4 - 1).
    """
    kappa, p, q = spec.kappa, spec.p, spec.q
    psl_lin = (1.0 - q) ** 2
    isl_lin = (kappa - 1) * psl_lin + (c.mu4 - 1.0) * (
        p**2 / kappa + (1.0 - 1.0 / kappa) * q**2
    )
    return SecurityMetrics(psl_linear=psl_lin, isl_linear=isl_lin)


def metrics_from_allocation(alloc: PowerAllocation, c: Constellation) -> SecurityMetrics:
    """PSL/ISL evaluated on the exact expectation profile of an allocation."""
    profile = expected_sq_acf(alloc, c)
    return SecurityMetrics(psl_linear=psl(profile), isl_linear=isl(profile))


def profile_to_rows(profile: AcfProfile, bin_m: float = math.nan) -> list[list]:
    """CSV rows (k, range_m, value_re, value_im, squared) for a profile."""
    rows = []
    for k in range(profile.n):
        if profile.values is None:
            re = im = ""
        else:
            re = profile.values[k].real
            im = profile.values[k].imag
        rows.append([k, k * bin_m, re, im, profile.squared[k]])
    return rows


PROFILE_CSV_HEADER = ["k", "range_m", "value_re", "value_im", "squared"]
