"""Bermudan dynamic programming on a Markov-chain discretization of the account.

The account diffusion is approximated by a continuous-time Markov chain on a
log-uniform state grid: tridiagonal generator rows match the local drift
(r - C(t_n, x)) x and variance sigma^2 x^2 exactly (drift upwinded where needed
to keep rates nonnegative), and the one-step transition matrix is the exact
matrix exponential of the generator over a step. Backward induction over the
exercise dates then values the surrender right for either reward convention.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .model import ConfigError, Scenario
from .surfaces import ValueSurface, center_index, log_space_nodes, time_nodes

__all__ = [
    "GridResolutionError",
    "ChainGrid",
    "ConvergenceStudy",
    "build_chain",
    "bermudan_value",
    "american_extrapolate",
]


class GridResolutionError(ConfigError):
    """The state grid is too coarse to produce a valid transition matrix."""


@dataclass(frozen=True)
class ChainGrid:
    """State chain for one scenario: nodes, exercise dates and per-step transitions.

    Transition matrices are shared between steps with identical coefficients
    (piecewise fees produce only a handful of distinct matrices).
    """

    xnodes: np.ndarray
    tnodes: np.ndarray
    step_keys: tuple[bytes, ...]
    matrices: dict
    discount: float
    xmax_mult: float

    @property
    def nsteps(self) -> int:
        return self.tnodes.size - 1

    @property
    def dt(self) -> float:
        return float(self.tnodes[1] - self.tnodes[0])

    def transition(self, n: int) -> np.ndarray:
        return self.matrices[self.step_keys[n]]

    def conditional_account_mean(self, n: int) -> np.ndarray:
        """One-step conditional mean of the account from each node."""
        return self.transition(n) @ self.xnodes


def _generator(xnodes: np.ndarray, mu: np.ndarray, var: np.ndarray) -> np.ndarray:
    M = xnodes.size
    Q = np.zeros((M, M))
    dl = np.diff(xnodes)  # dl[i] = x[i+1] - x[i]
    dm = dl[:-1]  # delta minus at interior node i = 1..M-2
    dp = dl[1:]
    mui = mu[1:-1]
    vari = var[1:-1]
    span = dm + dp
    q_dn = (vari - mui * dp) / (dm * span)
    q_up = (vari + mui * dm) / (dp * span)
    bad = (q_dn < 0.0) | (q_up < 0.0)
    if np.any(bad):
        # upwind the drift at offending nodes: first moment stays exact
        q_dn_u = vari / (dm * span) + np.maximum(-mui, 0.0) / dm
        q_up_u = vari / (dp * span) + np.maximum(mui, 0.0) / dp
        q_dn = np.where(bad, q_dn_u, q_dn)
        q_up = np.where(bad, q_up_u, q_up)
    idx = np.arange(1, M - 1)
    Q[idx, idx - 1] = q_dn
    Q[idx, idx + 1] = q_up
    Q[idx, idx] = -(q_dn + q_up)
    # bottom edge: inward drift only; top edge: absorbing (the backward
    # induction overrides the top node, see bermudan_value)
    if mu[0] > 0.0:
        Q[0, 1] = mu[0] / dl[0]
        Q[0, 0] = -Q[0, 1]
    if mu[-1] < 0.0:
        Q[-1, -2] = -mu[-1] / dl[-1]
        Q[-1, -1] = -Q[-1, -2]
    return Q


def build_chain(scn: Scenario, N: int, M: int, xmax_mult: float = 8.0) -> ChainGrid:
    """Build the state chain: log-uniform nodes, one transition matrix per step.

    Piecewise-fee breakpoints must land on time nodes (ConfigError otherwise);
    coefficients are frozen at each step's left endpoint.
    """
    xnodes = log_space_nodes(scn.contract.F0, xmax_mult, M)
    tnodes = time_nodes(scn, N)
    dt = float(tnodes[1] - tnodes[0])
    var = (scn.market.sigma * xnodes) ** 2
    step_keys: list[bytes] = []
    matrices: dict[bytes, np.ndarray] = {}
    for n in range(N):
        t_n = float(tnodes[n])
        c = np.broadcast_to(
            np.asarray(scn.fee(t_n, xnodes if not scn.fee.is_time_only else None), dtype=float),
            xnodes.shape,
        )
        key = c.tobytes()
        if key not in matrices:
            mu = (scn.market.r - c) * xnodes
            P = expm(_generator(xnodes, mu, var) * dt)
            rs_err = float(np.max(np.abs(P.sum(axis=1) - 1.0)))
            pmin = float(P.min())
            if rs_err > 1e-12 or pmin < -1e-12:
                raise GridResolutionError(
                    f"invalid transition matrix (row-sum err {rs_err:.2e}, min prob {pmin:.2e});"
                    f" try M >= {2 * M}"
                )
            np.maximum(P, 0.0, out=P)
            P.setflags(write=False)
            matrices[key] = P
        step_keys.append(key)
    return ChainGrid(
        xnodes=xnodes,
        tnodes=tnodes,
        step_keys=tuple(step_keys),
        matrices=matrices,
        discount=math.exp(-scn.market.r * dt),
        xmax_mult=xmax_mult,
    )


def _step(grid: ChainGrid, n: int, values: np.ndarray, rho: float) -> np.ndarray:
    """Discounted one-step expectation, with the top node replaced by linear
    extrapolation in x from the two interior neighbours (far-field behaviour
    of the value is linear; a truncated chain row cannot carry the outward
    drift and would bias the top node low)."""
    cont = grid.discount * (grid.transition(n) @ values)
    cont[-1] = cont[-2] + (cont[-2] - cont[-3]) * rho
    return cont


def bermudan_value(grid: ChainGrid, scn: Scenario, reward_kind: str = "discontinuous") -> ValueSurface:
    """Value the Bermudan surrender right by backward induction on the chain.

    reward_kind "discontinuous" uses the surrender payout g(t, x) x as exercise
    value; "continuous" uses g(t, x) x v h(t, x) with h computed by a
    no-exercise backward pass on the same chain, which keeps the two
    representations identical node-for-node up to roundoff.
    """
    if reward_kind not in ("discontinuous", "continuous"):
        raise ConfigError("reward_kind must be 'discontinuous' or 'continuous'")
    x = grid.xnodes
    tn = grid.tnodes
    N = grid.nsteps
    G = scn.contract.G
    rho = (x[-1] - x[-2]) / (x[-2] - x[-3])
    terminal = np.maximum(G, x)

    # Far-field slopes of admissible strategies, for time-only inputs:
    # holding and surrendering at the best deterministic future date is worth
    # exactly slope * x (guarantee ignored), a lower bound at every node. The
    # truncated chain cannot carry the account's outward drift near the upper
    # edge, so without this floor the top band spuriously exercises whenever
    # holding through a cheap-fee window is optimal.
    use_floor = scn.is_time_only
    if use_floor:
        # frozen-left fee, mirroring the chain's per-step coefficients
        dt = grid.dt
        step_decay = np.exp(-np.asarray(scn.fee(tn[:-1]), dtype=float) * dt)
        g_grid = np.asarray(scn.charge(tn), dtype=float)

    values = np.empty((N + 1, x.size))
    obstacle = np.empty_like(values)
    values[N] = terminal
    obstacle[N] = terminal
    V = terminal.copy()
    H = terminal.copy() if reward_kind == "continuous" else None
    slope_v = 1.0  # best-deterministic-surrender slope, = 1 at maturity
    slope_h = 1.0  # hold-to-maturity slope
    for n in range(N - 1, -1, -1):
        cont = _step(grid, n, V, rho)
        g = np.asarray(scn.charge(float(tn[n]), x if not scn.charge.is_time_only else None))
        ob = np.broadcast_to(g, x.shape) * x
        if use_floor:
            hold_v = step_decay[n] * slope_v
            np.maximum(cont, hold_v * x, out=cont)
            slope_v = max(float(g_grid[n]), hold_v)
            slope_h = step_decay[n] * slope_h
        if H is not None:
            H = _step(grid, n, H, rho)
            if use_floor:
                np.maximum(H, slope_h * x, out=H)
            ob = np.maximum(ob, H)
        V = np.maximum(ob, cont)
        values[n] = V
        obstacle[n] = ob
    return ValueSurface(
        tnodes=tn,
        xnodes=x,
        values=values,
        obstacle=obstacle,
        provenance="lattice",
        reward_kind=reward_kind,
        metadata={
            "N": N,
            "M": x.size,
            "xmax_mult": grid.xmax_mult,
            "solver_tol": 1e-12 * scn.contract.G,
        },
    )


@dataclass(frozen=True)
class ConvergenceStudy:
    """Exercise-date refinement study of the Bermudan value at (0, F0)."""

    nsteps: tuple[int, ...]
    values: tuple[float, ...]
    deltas: tuple[float, ...]
    extrapolated: float
    deltas_decreasing: bool
    surfaces: tuple[ValueSurface, ...]


def american_extrapolate(
    scn: Scenario,
    Nseq,
    M: int,
    xmax_mult: float = 8.0,
    reward_kind: str = "discontinuous",
) -> ConvergenceStudy:
    """Refine the exercise dates, report |value(2N) - value(N)| per doubling and
    an Aitken extrapolation of the continuously-exercisable limit.

    Non-decreasing deltas emit a convergence warning but still return data.
    """
    Nseq = tuple(int(n) for n in Nseq)
    if len(Nseq) < 3:
        raise ConfigError("need at least three refinement levels")
    if any(b <= a for a, b in zip(Nseq, Nseq[1:])):
        raise ConfigError("refinement levels must be increasing")
    surfaces = []
    vals = []
    for N in Nseq:
        grid = build_chain(scn, N, M, xmax_mult)
        surf = bermudan_value(grid, scn, reward_kind)
        surfaces.append(surf)
        i0 = center_index(surf.xnodes, scn.contract.F0)
        vals.append(float(surf.values[0, i0]))
    deltas = tuple(abs(b - a) for a, b in zip(vals, vals[1:]))
    decreasing = all(d2 < d1 for d1, d2 in zip(deltas, deltas[1:]))
    if not decreasing:
        warnings.warn("refinement deltas are not decreasing; extrapolation is unreliable",
                      RuntimeWarning, stacklevel=2)
    denom = (vals[-1] - vals[-2]) - (vals[-2] - vals[-3])
    if decreasing and abs(denom) > 1e-300:
        extrapolated = vals[-1] - (vals[-1] - vals[-2]) ** 2 / denom
    else:
        extrapolated = vals[-1]
    return ConvergenceStudy(
        nsteps=Nseq,
        values=tuple(vals),
        deltas=deltas,
        extrapolated=extrapolated,
        deltas_decreasing=decreasing,
        surfaces=tuple(surfaces),
    )
