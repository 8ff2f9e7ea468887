"""Finite-difference solver for the variational inequality satisfied by the value.

Crank-Nicolson in log-state with a Rannacher start (the terminal payoff has a
kink at x = G), and projected SOR enforcing the obstacle constraint
value >= surrender payout at every time level. This is the second, independent
pricing route next to the lattice module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ConfigError, L_value, Scenario
from .surfaces import ValueSurface, log_space_nodes, time_nodes

__all__ = [
    "SolverError",
    "PdeGrid",
    "SmoothFitReport",
    "build_pde_grid",
    "solve_variational_inequality",
    "smooth_fit_diagnostic",
]


class SolverError(RuntimeError):
    """PSOR failed to converge; carries the last update norm."""

    def __init__(self, message: str, last_delta: float):
        super().__init__(message)
        self.last_delta = last_delta


@dataclass(frozen=True)
class PdeGrid:
    """Log-uniform state nodes, uniform time steps and solver controls."""

    xnodes: np.ndarray
    tnodes: np.ndarray
    theta: float = 0.5
    omega: float = 1.5
    tol: float = 1e-8
    max_iter: int = 10_000
    rannacher_intervals: int = 2

    def __post_init__(self) -> None:
        if not 0.5 <= self.theta <= 1.0:
            raise ConfigError("theta must lie in [0.5, 1]")
        if not 0.0 < self.omega < 2.0:
            raise ConfigError("omega must lie in (0, 2)")
        if self.tol <= 0.0:
            raise ConfigError("tol must be positive")


def build_pde_grid(
    scn: Scenario,
    N: int,
    M: int,
    xmax_mult: float = 8.0,
    theta: float = 0.5,
    omega: float = 1.5,
    tol: float | None = None,
    max_iter: int = 10_000,
) -> PdeGrid:
    """Grid constructor; PSOR tolerance defaults to 1e-10 G (unit-free)."""
    return PdeGrid(
        xnodes=log_space_nodes(scn.contract.F0, xmax_mult, M),
        tnodes=time_nodes(scn, N),
        theta=theta,
        omega=omega,
        tol=1e-10 * scn.contract.G if tol is None else tol,
        max_iter=max_iter,
    )


def _psor(sub, diag, sup, rhs, obstacle, v0, omega, tol, max_iter):
    """Projected SOR on a tridiagonal system, red-black sweep order.

    Solves A v = rhs subject to v >= obstacle with componentwise
    complementarity; returns (v, iterations).
    """
    K = rhs.size
    v = np.maximum(v0, obstacle)
    vp = np.zeros(K + 2)
    vp[1:-1] = v
    last = math.inf
    for it in range(1, max_iter + 1):
        last = 0.0
        for start in (0, 1):
            sl = slice(start, K, 2)
            inner = vp[1:-1]
            gs = (rhs[sl] - sub[sl] * vp[:-2][sl] - sup[sl] * vp[2:][sl]) / diag[sl]
            vn = np.maximum(obstacle[sl], inner[sl] + omega * (gs - inner[sl]))
            d = float(np.max(np.abs(vn - inner[sl]))) if vn.size else 0.0
            last = max(last, d)
            inner[sl] = vn
        if last < tol:
            return vp[1:-1].copy(), it
    raise SolverError(f"PSOR did not converge in {max_iter} iterations (last update {last:.3e})", last)


def solve_variational_inequality(
    scn: Scenario,
    grid: PdeGrid,
    check_complementarity: bool = True,
) -> ValueSurface:
    """Backward time-stepping of max{A_t v + v_t - r v, payout - v} = 0.

    Terminal condition max(G, x); obstacle g(t, x) x enforced by PSOR at every
    level. Bottom boundary is the guarantee floor G e^{-r(T-t)}; the top node is
    clamped to the payout when the slice is expected to contain surrender states
    (L(t, x_max) < 0) and extrapolated linearly in x otherwise. State-dependent
    fees are accepted but tagged metadata["heuristic"].
    """
    x = grid.xnodes
    tn = grid.tnodes
    M = x.size
    N = tn.size - 1
    dt_full = float(tn[1] - tn[0])
    G, r, sig = scn.contract.G, scn.market.r, scn.market.sigma
    dy = float(np.log(x[1] / x[0]))
    rho_x = (x[-1] - x[-2]) / (x[-2] - x[-3])

    values = np.empty((N + 1, M))
    obstacle = np.empty_like(values)
    terminal = np.maximum(G, x)
    values[N] = terminal
    obstacle[N] = terminal

    comp_free_max = 0.0
    comp_active_min = 0.0
    iters_max = 0
    v = terminal.copy()

    s2 = 0.5 * sig * sig
    for n in range(N - 1, -1, -1):
        t_left = float(tn[n])
        g = np.asarray(scn.charge(t_left, x if not scn.charge.is_time_only else None))
        phi = np.broadcast_to(g, x.shape) * x
        c = np.broadcast_to(
            np.asarray(scn.fee(t_left, x if not scn.fee.is_time_only else None), dtype=float),
            x.shape,
        )
        adv = r - c - s2
        a = s2 / dy**2 - adv / (2.0 * dy)
        bq = np.full(x.size, -2.0 * s2 / dy**2 - r)
        cq = s2 / dy**2 + adv / (2.0 * dy)

        clamp_top = float(L_value(scn, t_left, float(x[-1]))) < 0.0

        rannacher = (N - 1 - n) < grid.rannacher_intervals
        substeps = 2 if rannacher else 1
        theta = 1.0 if rannacher else grid.theta
        dt = dt_full / substeps

        for k in range(substeps):
            t_level = float(tn[n + 1]) - dt * (k + 1)
            floor = G * math.exp(-r * (scn.contract.T - t_level))
            ai, bi, ci = a[1:-1], bq[1:-1], cq[1:-1]
            sub = -theta * dt * ai
            diag = 1.0 - theta * dt * bi
            sup = -theta * dt * ci
            # explicit part uses the full previous vector
            Lv = ai * v[:-2] + bi * v[1:-1] + ci * v[2:]
            rhs = v[1:-1] + (1.0 - theta) * dt * Lv
            rhs[0] -= sub[0] * floor
            sub = sub.copy()
            diag = diag.copy()
            sup = sup.copy()
            if clamp_top:
                rhs[-1] -= sup[-1] * phi[-1]
            else:
                # fold v_top = (1 + rho) v_{M-2} - rho v_{M-3} into the last row
                diag[-1] += sup[-1] * (1.0 + rho_x)
                sub[-1] -= sup[-1] * rho_x
            sup[-1] = 0.0
            sub[0] = 0.0
            v_int, iters = _psor(
                sub, diag, sup, rhs, phi[1:-1], v[1:-1], grid.omega, grid.tol, grid.max_iter
            )
            iters_max = max(iters_max, iters)
            if check_complementarity:
                res = (
                    sub * np.concatenate(([0.0], v_int[:-1]))
                    + diag * v_int
                    + sup * np.concatenate((v_int[1:], [0.0]))
                    - rhs
                )
                free = v_int > phi[1:-1] + 10.0 * grid.tol
                if np.any(free):
                    comp_free_max = max(comp_free_max, float(np.max(np.abs(res[free]))))
                if np.any(~free):
                    comp_active_min = min(comp_active_min, float(np.min(res[~free])))
            top = phi[-1] if clamp_top else (1.0 + rho_x) * v_int[-1] - rho_x * v_int[-2]
            v = np.concatenate(([floor], v_int, [max(top, phi[-1])]))
        values[n] = v
        obstacle[n] = phi
    return ValueSurface(
        tnodes=tn,
        xnodes=x,
        values=values,
        obstacle=obstacle,
        provenance="pde",
        reward_kind="discontinuous",
        metadata={
            "N": N,
            "M": M,
            "theta": grid.theta,
            "psor_tol": grid.tol,
            "psor_max_iterations": iters_max,
            "solver_tol": grid.tol,
            "heuristic": not scn.fee.is_time_only,
            "complementarity_free_max": comp_free_max,
            "complementarity_active_min": comp_active_min,
        },
    )


@dataclass(frozen=True)
class SmoothFitReport:
    """Per-time one-sided slopes around the boundary and their jump."""

    times: np.ndarray
    boundary: np.ndarray
    slope_left: np.ndarray
    slope_right: np.ndarray
    jump: np.ndarray
    skipped: tuple[str, ...]


def smooth_fit_diagnostic(surface: ValueSurface, scn: Scenario, boundary, times=None) -> SmoothFitReport:
    """Measure the slope discontinuity of the value across the boundary.

    For each requested time with a finite boundary node b, the right slope is
    taken over the first full surrender cell (where the value sits on the
    linear payout, so it equals g(t) exactly) and the left slope over the last
    full continuation cell. Their absolute difference vanishes with the mesh
    when the value is continuously differentiable across the boundary. Empty
    sections are skipped with a marker.
    """
    x = surface.xnodes
    tq = surface.tnodes[:-1] if times is None else np.asarray(times, dtype=float)
    jumps = np.full(tq.size, np.nan)
    lefts = np.full(tq.size, np.nan)
    rights = np.full(tq.size, np.nan)
    bvals = np.full(tq.size, np.inf)
    skipped: list[str] = []
    for j, t in enumerate(tq):
        n = int(np.argmin(np.abs(surface.tnodes - t)))
        if abs(surface.tnodes[n] - t) > 1e-9 * max(1.0, surface.tnodes[-1]):
            raise ConfigError(f"t={t} is not a grid time")
        b = boundary.values[n] if n < len(boundary.values) else np.inf
        if not np.isfinite(b):
            skipped.append(f"t={t}: empty section")
            continue
        i = int(np.searchsorted(x, b * (1.0 - 1e-12)))
        if i < 2 or i + 1 >= x.size:
            skipped.append(f"t={t}: boundary too close to the grid edge")
            continue
        v = surface.values[n]
        lefts[j] = (v[i - 1] - v[i - 2]) / (x[i - 1] - x[i - 2])
        rights[j] = (v[i + 1] - v[i]) / (x[i + 1] - x[i])
        jumps[j] = abs(rights[j] - lefts[j])
        bvals[j] = b
    return SmoothFitReport(
        times=tq,
        boundary=bvals,
        slope_left=lefts,
        slope_right=rights,
        jump=jumps,
        skipped=tuple(skipped),
    )
