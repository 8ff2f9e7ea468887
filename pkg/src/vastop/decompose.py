"""Premium representations of the contract value and their residuals.

Two exact identities are evaluated by quadrature against a threshold boundary:

* value = maturity-benefit value + surrender premium, where the premium
  integrates (c g - g') times the discounted account expectation above the
  boundary;
* value = surrender payout + continuation premium, where the premium is the
  guarantee put plus the complementary integral below the boundary.

Subtracting the two gives the solver-free identity
surrender premium - continuation premium = payout - maturity benefit,
used to cross-check the quadratures without any PDE/lattice input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .analytic import guarantee_put_value, maturity_benefit_value
from .model import ConfigError, Scenario, UnsupportedScenarioError
from .region import Boundary
from .surfaces import ValueSurface

__all__ = [
    "DecompositionReport",
    "surrender_premium",
    "continuation_premium",
    "decomposition_residuals",
]


class _StepQuadrature:
    """Per-step Simpson nodes and integrand factors shared by all queries.

    Composite Simpson on the exercise-date grid, one panel per step, with the
    boundary frozen at the step's left node and the fee evaluated one-sidedly
    so panel integrands stay smooth across fee breakpoints and boundary
    empty/nonempty transitions (both live on grid times).
    """

    def __init__(self, scn: Scenario, boundary: Boundary):
        if not scn.is_time_only:
            raise UnsupportedScenarioError("premium quadratures need time-only fee and charge")
        tn = np.asarray(boundary.tnodes, dtype=float)
        self.tnodes = tn
        self.nsteps = tn.size - 1
        dt = np.diff(tn)
        mids = 0.5 * (tn[:-1] + tn[1:])
        # Simpson nodes per step: left endpoint, midpoint, right endpoint
        self.s_nodes = np.stack([tn[:-1], mids, tn[1:]], axis=1).reshape(-1)
        self.weights = np.stack([dt / 6.0, 4.0 * dt / 6.0, dt / 6.0], axis=1).reshape(-1)
        cL = np.asarray([scn.fee.rate_right(float(t)) for t in tn[:-1]])
        cM = np.asarray(scn.fee(mids), dtype=float)
        cR = np.asarray(scn.fee(tn[1:]), dtype=float)
        c = np.stack([cL, cM, cR], axis=1).reshape(-1)
        g = np.asarray(scn.charge(self.s_nodes), dtype=float)
        gt = np.asarray(scn.charge.dt(self.s_nodes), dtype=float)
        self.factor = (c * g - gt) * self.weights  # premium integrand weight per node
        # exact fee integrals from 0 to each Simpson node
        I_grid = np.array([scn.fee.integral(0.0, float(t)) for t in tn])
        I_mid = I_grid[:-1] + np.array(
            [scn.fee.integral(float(a), float(m)) for a, m in zip(tn[:-1], mids)]
        )
        self.fee_int = np.stack([I_grid[:-1], I_mid, I_grid[1:]], axis=1).reshape(-1)
        self.K = np.repeat(np.asarray(boundary.values, dtype=float), 3)
        self.scn = scn

    def premiums(self, n0: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Surrender and continuation premiums at (tnodes[n0], x)."""
        scn = self.scn
        t = float(self.tnodes[n0])
        x = np.asarray(x, dtype=float)
        put = np.asarray(guarantee_put_value(scn, t, x), dtype=float)
        lo = 3 * n0
        if lo >= self.s_nodes.size:
            return np.zeros_like(x), put
        s = self.s_nodes[lo:]
        w = self.factor[lo:]
        K = self.K[lo:]
        tau = s - t
        fee_int = self.fee_int[lo:] - self.fee_int[lo]
        e0 = x[None, :] * np.exp(-fee_int)[:, None]  # E[e^{-r tau} F_s], full
        sig = scn.market.sigma
        r = scn.market.r
        eK = np.zeros_like(e0)
        finite = np.isfinite(K)
        pos = tau > 0.0
        rows = finite & pos
        if np.any(rows):
            sst = sig * np.sqrt(tau[rows])
            d1 = (
                np.log(x[None, :] / K[rows, None])
                + (r * tau[rows] - fee_int[rows])[:, None]
                + 0.5 * (sst**2)[:, None]
            ) / sst[:, None]
            eK[rows] = e0[rows] * ndtr(d1)
        start = finite & ~pos
        if np.any(start):  # s == t: indicator is deterministic
            eK[start] = np.where(x[None, :] >= K[start, None], x[None, :], 0.0)
        e = w @ eK
        quad_full = w @ e0
        f = put + e - quad_full
        return e, f


def _boundary_index(boundary: Boundary, t: float) -> int:
    tn = np.asarray(boundary.tnodes, dtype=float)
    n = int(np.argmin(np.abs(tn - t)))
    if abs(tn[n] - t) > 1e-9 * max(1.0, tn[-1]):
        raise ConfigError(f"t={t} is not an exercise date of the boundary grid")
    return n


def surrender_premium(scn: Scenario, boundary: Boundary, t: float, x):
    """Value of the surrender right: integral of (c g - g') against the
    discounted account expectation above the boundary; empty sections
    contribute nothing."""
    quad = _StepQuadrature(scn, boundary)
    e, _ = quad.premiums(_boundary_index(boundary, t), np.atleast_1d(np.asarray(x, dtype=float)))
    return float(e[0]) if np.ndim(x) == 0 else e


def continuation_premium(scn: Scenario, boundary: Boundary, t: float, x):
    """Value of holding on: guarantee put plus the complementary integral of
    (g' - c g) against the expectation below the boundary; empty sections use
    the full expectation. Returns (G - x)_+ at maturity."""
    quad = _StepQuadrature(scn, boundary)
    _, f = quad.premiums(_boundary_index(boundary, t), np.atleast_1d(np.asarray(x, dtype=float)))
    return float(f[0]) if np.ndim(x) == 0 else f


@dataclass(frozen=True)
class DecompositionReport:
    """Residuals of both premium representations across a value surface."""

    tnodes: np.ndarray
    xnodes: np.ndarray
    h: np.ndarray
    e: np.ndarray
    f: np.ndarray
    res_he: np.ndarray
    res_phif: np.ndarray
    max_abs_res_he: float
    mean_abs_res_he: float
    max_abs_res_phif: float
    mean_abs_res_phif: float
    min_e: float
    min_f: float
    flagged: tuple[tuple[int, int], ...]


def decomposition_residuals(
    surface: ValueSurface,
    scn: Scenario,
    boundary: Boundary,
    tolerance: float | None = None,
    interior_margin: int = 2,
) -> DecompositionReport:
    """Evaluate both premium representations on the surface grid.

    Residual statistics are taken over the interior nodes (skipping
    ``interior_margin`` state nodes at each edge, where truncation boundary
    conditions rather than the identities dominate); nodes whose residual
    exceeds ``tolerance`` (default 5e-3 G) are flagged.
    """
    if not np.array_equal(surface.tnodes, boundary.tnodes):
        raise ConfigError("surface and boundary live on different time grids")
    if tolerance is None:
        tolerance = 5e-3 * scn.contract.G
    quad = _StepQuadrature(scn, boundary)
    tn = surface.tnodes
    x = surface.xnodes
    Np1 = tn.size
    h = np.empty((Np1, x.size))
    e = np.empty_like(h)
    f = np.empty_like(h)
    phi = np.empty_like(h)
    for n in range(Np1):
        t = float(tn[n])
        h[n] = maturity_benefit_value(scn, t, x)
        e[n], f[n] = quad.premiums(n, x)
        # payout branch of the representation is the surrender value x g(t, x)
        # at every date; at maturity g = 1 and v = x + (G - x)_+ exactly
        g = np.asarray(scn.charge(t, x if not scn.charge.is_time_only else None))
        phi[n] = np.broadcast_to(g, x.shape) * x
    res_he = surface.values - h - e
    res_phif = surface.values - phi - f
    sl = slice(interior_margin, x.size - interior_margin)
    flagged = tuple(
        (int(n), int(i))
        for n, i in zip(*np.nonzero(np.abs(res_he[:, sl]) > tolerance))
    )
    return DecompositionReport(
        tnodes=tn,
        xnodes=x,
        h=h,
        e=e,
        f=f,
        res_he=res_he,
        res_phif=res_phif,
        max_abs_res_he=float(np.max(np.abs(res_he[:, sl]))),
        mean_abs_res_he=float(np.mean(np.abs(res_he[:, sl]))),
        max_abs_res_phif=float(np.max(np.abs(res_phif[:, sl]))),
        mean_abs_res_phif=float(np.mean(np.abs(res_phif[:, sl]))),
        min_e=float(np.min(e)),
        min_f=float(np.min(f)),
        flagged=flagged,
    )
