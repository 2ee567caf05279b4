"""Sensing-secure signaling design: comb spacing selection, the security
budget on the complement subcarriers, and the rate-vs-loss convex program.

The program maximizes
    -(1 - rho) * L(a) / L_ref + rho * R(a) / R_ref
over subcarrier powers a, subject to sum(a) = N, a >= floor, and a cap on
the total power of the non-dominant (complement) subcarriers that pins the
peak sidelobe level at or above the requested security level. L (SNR loss)
is convex and R (rate) concave in a, so projected-gradient ascent with an
exact polytope projection finds the global optimum. L_ref and R_ref are the
single-objective optima under the same constraints, which normalizes the
objective into [-1, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .acf import metrics_closed_form, metrics_from_allocation
from .constellation import Constellation
from .errors import InfeasibleSecurityError, SolverError
from .receivers import snr_loss_closed_form
from .scene import CommChannel, OfdmGrid, comm_rate
from .util import rng_from_seed
from .waveform import (
    DEFAULT_POWER_FLOOR,
    AllocationStructure,
    PowerAllocation,
    SecureAcfSpec,
    structured_allocation,
)


@dataclass(frozen=True)
class DesignRequest:
    """Inputs of the signaling design problem (all security levels linear)."""

    rho: float
    eps_psl: float
    eps_isl: float
    channel: CommChannel
    constellation: Constellation
    grid: OfdmGrid
    n0: Union[int, str] = 1
    power_floor: float = DEFAULT_POWER_FLOOR

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if not 0.0 < self.eps_psl < 1.0:
            raise ValueError("eps_psl must lie in (0, 1)")
        if self.eps_isl <= 0.0:
            raise ValueError("eps_isl must be > 0")
        if self.n0 != "search" and not isinstance(self.n0, int):
            raise ValueError("n0 must be an integer or 'search'")


@dataclass(frozen=True)
class DesignResult:
    alloc: PowerAllocation
    kappa: int
    predicted: dict
    objective_value: float
    n0: int
    iterations: int
    #: single-objective optima used to normalize the two objective terms
    loss_ref: float = float("nan")
    rate_ref: float = float("nan")

    def objective_at(self, power: np.ndarray, rho: float, channel, constellation, grid) -> float:
        """Normalized objective value of an arbitrary allocation vector."""
        lv = constellation.nu_m2 / len(power) * float(np.sum(1.0 / power))
        gsnr = channel.snr_per_subcarrier()
        rv = grid.bandwidth_hz / grid.n * float(np.sum(np.log2(1.0 + gsnr * power)))
        return -(1.0 - rho) * lv / self.loss_ref + rho * rv / self.rate_ref


def select_kappa(eps_isl: float, eps_psl: float, mu4: float, n: int) -> int:
    """Smallest power-of-two comb spacing meeting both security levels.

    Solves kappa >= (eps_isl - mu4 + 1) / (eps_psl * mu4) + 1 and rounds up
    to the next power of two; the spacing must stay at or below N/2.
    """
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"subcarrier count must be a power of two, got {n}")
    required = (eps_isl - mu4 + 1.0) / (eps_psl * mu4) + 1.0
    if required <= 1.0:
        kappa = 2
    else:
        kappa = 2 ** (math.floor(math.log2(required)) + 1)
    kappa = max(kappa, 2)
    if kappa > n // 2:
        raise InfeasibleSecurityError(
            f"security levels need comb spacing {kappa}, beyond the N/2={n // 2} limit"
        )
    return kappa


def psl_budget(eps_psl: float, kappa: int, n: int) -> float:
    """Total power cap on complement subcarriers that enforces the PSL level."""
    return n * (kappa - 1) / kappa * (1.0 - math.sqrt(eps_psl))


def project_floor_simplex(y: np.ndarray, total: float, floor: float) -> np.ndarray:
    """Euclidean projection onto {x : sum(x) = total, x >= floor}."""
    y = np.asarray(y, dtype=float)
    n = len(y)
    budget = total - n * floor
    if budget < -1e-12:
        raise InfeasibleSecurityError("floor constraints exceed the available power")
    z = y - floor
    # sort-based exact projection of z onto the simplex of mass `budget`
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - budget
    j = np.arange(1, n + 1)
    cond = u - css / j > 0
    rho = int(np.max(np.flatnonzero(cond))) + 1 if np.any(cond) else 1
    theta = css[rho - 1] / rho
    return np.maximum(z - theta, 0.0) + floor


def make_polytope_projection(
    n: int, comp_mask: np.ndarray, comp_budget: float, floor: float
) -> Callable[[np.ndarray], np.ndarray]:
    """Projection onto {sum = N, complement sum <= budget, entries >= floor}.

    If the plain sum projection violates the complement cap, the cap is
    active at the optimum and the problem splits into two independent
    equality-constrained projections over the disjoint index sets.
    """
    comp_mask = np.asarray(comp_mask, dtype=bool)
    n_comp = int(comp_mask.sum())
    n_dom = n - n_comp
    if comp_budget < n_comp * floor - 1e-12:
        raise InfeasibleSecurityError(
            "complement power budget is below the floor requirement"
        )
    if n - comp_budget < n_dom * floor - 1e-12:
        raise InfeasibleSecurityError("dominant-set power cannot satisfy the floor")

    def project(y: np.ndarray) -> np.ndarray:
        x = project_floor_simplex(y, float(n), floor)
        if x[comp_mask].sum() <= comp_budget + 1e-12:
            return x
        out = np.empty_like(x)
        out[comp_mask] = project_floor_simplex(y[comp_mask], comp_budget, floor)
        out[~comp_mask] = project_floor_simplex(y[~comp_mask], n - comp_budget, floor)
        return out

    return project


def projected_gradient_norm(
    a: np.ndarray, grad: np.ndarray, project: Callable[[np.ndarray], np.ndarray]
) -> float:
    """Unit-step gradient-mapping norm; zero exactly at a KKT point."""
    return float(np.linalg.norm(project(a + grad) - a))


def _pgd_maximize(
    value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    project: Callable[[np.ndarray], np.ndarray],
    a0: np.ndarray,
    gtol: float = 1e-8,
    max_iter: int = 5000,
    fail_tol: float = 1e-6,
) -> tuple[np.ndarray, int]:
    """Projected-gradient ascent with backtracking (Armijo) line search.

    Terminates at gradient-mapping norm < gtol or after max_iter steps;
    the run only counts as failed when the final mapping norm is still
    above fail_tol. Steps start from a Barzilai-Borwein estimate of the
    local curvature, which keeps the tail fast on ill-conditioned mixes.
    """
    a = project(np.asarray(a0, dtype=float))
    f, g = value_and_grad(a)
    step = 1.0
    a_prev = g_prev = None
    for it in range(1, max_iter + 1):
        if projected_gradient_norm(a, g, project) < gtol:
            return a, it
        if a_prev is not None:
            s = a - a_prev
            y = g - g_prev
            sy = float(s @ y)  # <= 0 for a concave objective
            if sy < 0:
                step = min(max(float(s @ s) / (-sy), 1e-10), 1e10)
        accepted = False
        while step > 1e-18:
            cand = project(a + step * g)
            delta = cand - a
            f_cand, g_cand = value_and_grad(cand)
            if f_cand >= f + 1e-4 * float(g @ delta):
                a_prev, g_prev = a, g
                a, f, g = cand, f_cand, g_cand
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # line search exhausted float precision
    gnorm = projected_gradient_norm(a, g, project)
    if gnorm <= fail_tol:
        return a, min(it, max_iter)
    raise SolverError(
        f"no convergence after {it} iterations; gradient mapping norm {gnorm:.3e}"
    )


def _loss_value_grad(a: np.ndarray, nu_m2: float) -> tuple[float, np.ndarray]:
    n = len(a)
    return nu_m2 / n * float(np.sum(1.0 / a)), -nu_m2 / n / a**2


def _rate_value_grad(a: np.ndarray, gsnr: np.ndarray, bw_per_sc: float) -> tuple[float, np.ndarray]:
    one_plus = 1.0 + gsnr * a
    value = bw_per_sc * float(np.sum(np.log2(one_plus)))
    grad = bw_per_sc / math.log(2.0) * gsnr / one_plus
    return value, grad


def _solve_for_shift(req: DesignRequest, kappa: int, n0: int, gtol: float) -> DesignResult:
    n = req.grid.n
    comp_mask = np.ones(n, dtype=bool)
    comp_mask[n0 - 1 :: kappa] = False
    budget = psl_budget(req.eps_psl, kappa, n)
    project = make_polytope_projection(n, comp_mask, budget, req.power_floor)
    gsnr = req.channel.snr_per_subcarrier()
    bw_per_sc = req.grid.bandwidth_hz / n
    nu_m2 = req.constellation.nu_m2
    a0 = np.ones(n)

    def neg_loss(a):
        v, g = _loss_value_grad(a, nu_m2)
        return -v / nu_m2, -g / nu_m2  # scaled so gradients are O(1)

    a_loss, _ = _pgd_maximize(neg_loss, project, a0, gtol=gtol)
    loss_ref = _loss_value_grad(a_loss, nu_m2)[0]

    rate_scale = max(_rate_value_grad(a0, gsnr, bw_per_sc)[0], 1e-12)

    def scaled_rate(a):
        v, g = _rate_value_grad(a, gsnr, bw_per_sc)
        return v / rate_scale, g / rate_scale

    a_rate, _ = _pgd_maximize(scaled_rate, project, a0, gtol=gtol)
    rate_ref = _rate_value_grad(a_rate, gsnr, bw_per_sc)[0]

    rho = req.rho

    def objective(a):
        lv, lg = _loss_value_grad(a, nu_m2)
        rv, rg = _rate_value_grad(a, gsnr, bw_per_sc)
        value = -(1.0 - rho) * lv / loss_ref + rho * rv / rate_ref
        grad = -(1.0 - rho) * lg / loss_ref + rho * rg / rate_ref
        return value, grad

    start = {0.0: a_loss, 1.0: a_rate}.get(rho, 0.5 * (a_loss + a_rate))
    a_opt, iters = _pgd_maximize(objective, project, start, gtol=gtol)
    obj_value = objective(a_opt)[0]

    dom = ~comp_mask
    structure = AllocationStructure(
        p=float(a_opt[dom].mean()), q=float(a_opt[comp_mask].mean()), kappa=kappa, n0=n0
    )
    alloc = PowerAllocation(power=a_opt, structure=structure, power_floor=req.power_floor)
    metrics = metrics_from_allocation(alloc, req.constellation)
    predicted = {
        "rate_bps": comm_rate(req.channel, alloc, req.grid),
        "snr_loss": snr_loss_closed_form(alloc, req.constellation),
        "psl": metrics.psl_linear,
        "isl": metrics.isl_linear,
    }
    return DesignResult(
        alloc=alloc,
        kappa=kappa,
        predicted=predicted,
        objective_value=float(obj_value),
        n0=n0,
        iterations=iters,
        loss_ref=loss_ref,
        rate_ref=rate_ref,
    )


def solve_p2(req: DesignRequest, gtol: float = 1e-8) -> DesignResult:
    """Solve the security-constrained rate/loss design problem.

    With n0="search" every comb shift is solved (the security metrics are
    shift invariant) and the best objective wins, which lets the dominant
    set line up with strong subcarriers of a selective channel.
    """
    kappa = select_kappa(req.eps_isl, req.eps_psl, req.constellation.mu4, req.grid.n)
    shifts = range(1, kappa + 1) if req.n0 == "search" else [int(req.n0)]
    for n0 in shifts:
        if not 1 <= n0 <= kappa:
            raise ValueError(f"n0 must lie in 1..kappa={kappa}, got {n0}")
    best: Optional[DesignResult] = None
    for n0 in shifts:
        result = _solve_for_shift(req, kappa, n0, gtol)
        if best is None or result.objective_value > best.objective_value:
            best = result
    assert best is not None
    return best


def random_feasible_points(
    n: int,
    comp_mask: np.ndarray,
    comp_budget: float,
    floor: float,
    count: int,
    seed: int,
) -> np.ndarray:
    """Random points in the design polytope (for optimality audits)."""
    project = make_polytope_projection(n, comp_mask, comp_budget, floor)
    rng = rng_from_seed(seed)
    return np.stack([project(rng.uniform(0.0, 2.0, size=n)) for _ in range(count)])


TRADEOFF_CSV_HEADER = [
    "kappa",
    "p",
    "q",
    "psl",
    "isl",
    "snr_loss",
    "rate_bps",
]


def tradeoff_sweep(
    kappas: list[int],
    q_grid: np.ndarray,
    constellation: Constellation,
    channel: CommChannel,
    grid: OfdmGrid,
    power_floor: float = DEFAULT_POWER_FLOOR,
) -> list[dict]:
    """Feasible performance points over comb parameter triples (p, q, kappa).

    Emits one row per valid triple plus the two closed-form anchors: the
    sensing-optimal point (kappa = 1, equal power) and the security-optimal
    point (kappa = N/2, q at the floor).
    """
    rows = []

    def add_row(alloc: PowerAllocation, kappa: int, p: float, q: float):
        if kappa > 1:
            closed = metrics_closed_form(
                SecureAcfSpec(alpha_frac=1.0 - q, num_peaks=kappa - 1), constellation
            )
            psl_lin, isl_lin = closed.psl_linear, closed.isl_linear
        else:
            psl_lin, isl_lin = 0.0, constellation.mu4 - 1.0
        rows.append(
            {
                "kappa": kappa,
                "p": p,
                "q": q,
                "psl": psl_lin,
                "isl": isl_lin,
                "snr_loss": snr_loss_closed_form(alloc, constellation),
                "rate_bps": comm_rate(channel, alloc, grid),
            }
        )

    # sensing-optimal anchor
    equal = PowerAllocation(power=np.ones(grid.n))
    add_row(equal, 1, 1.0, 1.0)

    for kappa in kappas:
        if kappa < 2 or grid.n % kappa != 0:
            continue
        for q in q_grid:
            if q < power_floor or q >= 1.0:
                continue
            spec = SecureAcfSpec(alpha_frac=1.0 - float(q), num_peaks=kappa - 1)
            alloc = structured_allocation(spec, grid.n, power_floor=power_floor)
            add_row(alloc, kappa, spec.p, spec.q)

    # security-optimal anchor: widest comb, complement at the floor
    kappa_max = grid.n // 2
    spec = SecureAcfSpec(alpha_frac=1.0 - power_floor, num_peaks=kappa_max - 1)
    alloc = structured_allocation(spec, grid.n, power_floor=power_floor)
    add_row(alloc, kappa_max, spec.p, spec.q)
    return rows
