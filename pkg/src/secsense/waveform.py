"""Subcarrier power allocations that shape the transmit autocorrelation.

The secure-ACF comb places a dominant power p on every kappa-th subcarrier
and q < p on the rest, which turns the ACF into a Dirac comb: a mainlobe
plus L = kappa - 1 artificial peaks of height alpha = N * alpha_frac.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivisibilityError, FloorError, InfeasibleAcfError
from .util import rng_from_seed

#: Minimum admissible per-subcarrier power. q = 0 would make the reciprocal
#: filter divide by zero, so allocations must stay strictly above this floor.
DEFAULT_POWER_FLOOR = 1e-4

_SUM_TOL = 1e-9


@dataclass(frozen=True)
class SecureAcfSpec:
    """Target comb shape: peak fraction alpha/N and number of peaks L.

    Derived allocation parameters:
      kappa = L + 1 (comb spacing in subcarriers),
      p = 1 + alpha_frac * L (dominant power),
      q = 1 - alpha_frac (complement power),
    with p + (kappa - 1) q = kappa by construction.
    """

    alpha_frac: float
    num_peaks: int

    def __post_init__(self):
        if not 0.0 < self.alpha_frac < 1.0:
            raise ValueError("alpha_frac must lie in (0, 1)")
        if self.num_peaks < 1:
            raise ValueError("num_peaks must be >= 1")

    @property
    def kappa(self) -> int:
        return self.num_peaks + 1

    @property
    def p(self) -> float:
        return 1.0 + self.alpha_frac * self.num_peaks

    @property
    def q(self) -> float:
        return 1.0 - self.alpha_frac

    def lambda_bins(self, n: int) -> int:
        """Peak periodicity in ACF bins: n / kappa."""
        self.check_divides(n)
        return n // self.kappa

    def alpha(self, n: int) -> float:
        """Artificial-peak magnitude in ACF units."""
        return self.alpha_frac * n

    def check_divides(self, n: int) -> None:
        if n % self.kappa != 0:
            raise DivisibilityError(
                f"kappa={self.kappa} does not divide n={n}"
            )


@dataclass(frozen=True)
class AllocationStructure:
    """(p, q, kappa, n0) tag for comb-structured allocations; n0 is 1-based."""

    p: float
    q: float
    kappa: int
    n0: int


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Per-subcarrier powers |w_n|^2, normalized so they sum to N."""

    power: np.ndarray
    structure: Optional[AllocationStructure] = None
    power_floor: float = DEFAULT_POWER_FLOOR

    def __post_init__(self):
        power = np.asarray(self.power, dtype=float)
        power.setflags(write=False)
        object.__setattr__(self, "power", power)
        n = len(power)
        if abs(power.sum() - n) > _SUM_TOL:
            raise ValueError(f"power must sum to n={n}, got {power.sum()!r}")
        if np.any(power < self.power_floor - 1e-12):
            raise FloorError(
                f"allocation entries below power floor {self.power_floor:g}"
            )

    @property
    def n(self) -> int:
        return len(self.power)

    def amplitudes(self) -> np.ndarray:
        """Per-subcarrier amplitudes |w_n| (phase is irrelevant here)."""
        return np.sqrt(self.power)

    def dominant_indices(self) -> np.ndarray:
        """0-based indices of the dominant comb set; requires a structure tag."""
        if self.structure is None:
            raise ValueError("allocation has no comb structure tag")
        return np.arange(self.structure.n0 - 1, self.n, self.structure.kappa)

    def to_json_dict(self) -> dict:
        doc = {"schema_version": 1, "n": self.n, "power": self.power.tolist()}
        if self.structure is not None:
            s = self.structure
            doc["structure"] = {"p": s.p, "q": s.q, "kappa": s.kappa, "n0": s.n0}
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PowerAllocation":
        structure = None
        if doc.get("structure") is not None:
            s = doc["structure"]
            structure = AllocationStructure(
                p=float(s["p"]), q=float(s["q"]), kappa=int(s["kappa"]), n0=int(s["n0"])
            )
        power = np.asarray(doc["power"], dtype=float)
        if "n" in doc and int(doc["n"]) != len(power):
            raise ValueError("allocation document: n does not match power length")
        return cls(power=power, structure=structure)

    @classmethod
    def from_json(cls, text: str) -> "PowerAllocation":
        return cls.from_json_dict(json.loads(text))


def equal_allocation(n: int) -> PowerAllocation:
    """All-ones allocation (no ACF shaping)."""
    return PowerAllocation(
        power=np.ones(n),
        structure=AllocationStructure(p=1.0, q=1.0, kappa=1, n0=1),
    )


def structured_allocation(
    spec: SecureAcfSpec,
    n: int,
    n0: int = 1,
    power_floor: float = DEFAULT_POWER_FLOOR,
) -> PowerAllocation:
    """Two-level comb allocation: p on {n0, n0+kappa, ...}, q elsewhere."""
    spec.check_divides(n)
    if not 1 <= n0 <= spec.kappa:
        raise ValueError(f"n0 must lie in 1..kappa={spec.kappa}, got {n0}")
    if spec.q < power_floor - 1e-12:
        raise FloorError(
            f"complement power q={spec.q:g} below floor {power_floor:g}"
        )
    power = np.full(n, spec.q)
    power[n0 - 1 :: spec.kappa] = spec.p
    # remove the accumulated rounding drift so the unit-power constraint is exact
    power *= n / power.sum()
    return PowerAllocation(
        power=power,
        structure=AllocationStructure(p=spec.p, q=spec.q, kappa=spec.kappa, n0=n0),
        power_floor=power_floor,
    )


def stochastic_allocation(
    spec: SecureAcfSpec,
    n: int,
    n0: int = 1,
    jitter: float = 0.0,
    seed: int = 0,
    power_floor: float = DEFAULT_POWER_FLOOR,
) -> PowerAllocation:
    """Random allocation with mean p/q comb levels and std `jitter` per entry.

    Entries are redrawn around the structured levels and rescaled so the
    total power constraint holds exactly. In expectation the squared ACF
    matches the structured comb (plus an n * jitter^2 pedestal).
    """
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    base = structured_allocation(spec, n, n0, power_floor=power_floor)
    if jitter == 0.0:
        return base
    rng = rng_from_seed(seed)
    power = base.power + jitter * rng.standard_normal(n)
    power *= n / power.sum()
    if np.any(power < power_floor - 1e-12):
        raise FloorError(
            "jittered allocation breaches the power floor; reduce jitter"
        )
    return PowerAllocation(power=power, structure=base.structure, power_floor=power_floor)


def secure_acf_comb(spec: SecureAcfSpec, n: int) -> np.ndarray:
    """Ideal comb ACF: n at lag 0 and alpha at lags l * lambda, l = 1..L."""
    lam = spec.lambda_bins(n)
    acf = np.zeros(n)
    acf[0] = n
    acf[lam::lam] = spec.alpha(n)
    return acf


def ideal_acf_to_allocation(
    acf: np.ndarray, power_floor: float = DEFAULT_POWER_FLOOR
) -> PowerAllocation:
    """Invert a comb ACF into subcarrier powers via the DFT.

    The target comb must carry an N-height mainlobe; a comb whose peaks are
    too large maps to negative powers and is rejected.
    """
    acf = np.asarray(acf, dtype=float)
    n = len(acf)
    if abs(acf[0] - n) > 1e-6:
        raise ValueError(f"comb mainlobe must equal n={n}, got {acf[0]!r}")
    power = np.fft.fft(acf).real / n
    if np.any(power < 0.0):
        raise InfeasibleAcfError("comb maps to negative subcarrier powers")
    if np.any(power < power_floor - 1e-12):
        raise FloorError("comb maps below the power floor")
    power = power * (n / power.sum())
    structure = _infer_structure(power)
    return PowerAllocation(power=power, structure=structure, power_floor=power_floor)


def _infer_structure(power: np.ndarray, tol: float = 1e-9) -> Optional[AllocationStructure]:
    """Detect an exact two-level comb and return its (p, q, kappa, n0) tag."""
    n = len(power)
    p = power.max()
    q = power.min()
    if p - q <= tol:
        return AllocationStructure(p=float(p), q=float(q), kappa=1, n0=1)
    dominant = np.flatnonzero(power > q + 0.5 * (p - q))
    if len(dominant) == 0 or n % len(dominant) != 0:
        return None
    kappa = n // len(dominant)
    n0 = int(dominant[0]) + 1
    expected = np.full(n, q)
    expected[dominant[0] :: kappa] = p
    if len(dominant) * kappa == n and np.allclose(power, expected, atol=tol):
        return AllocationStructure(p=float(p), q=float(q), kappa=kappa, n0=n0)
    return None
