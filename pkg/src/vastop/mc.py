"""Monte Carlo path engine: independent verification of prices and premiums.

Randomness comes from the counter-based Philox generator. Paths are produced
in fixed-size chunks of 2^14; chunk i draws from Philox(key=seed).jumped(i)
with a path-major normal matrix, so results are bit-reproducible for a given
(seed, npaths, nsteps, scheme) no matter how chunks are scheduled, and chunks
could run on parallel workers without changing a single bit. Per-path payoff
moments are accumulated with numpy's pairwise summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ConfigError, Scenario, UnsupportedScenarioError
from .region import Boundary, RegionMask

__all__ = [
    "CHUNK_PATHS",
    "PathBatch",
    "McEstimate",
    "McPremiumEstimates",
    "simulate_paths",
    "mc_maturity_benefit",
    "mc_boundary_strategy_value",
    "mc_premium_integrals",
]

CHUNK_PATHS = 1 << 14

_SCHEMES = ("exact-lognormal", "euler")


@dataclass(frozen=True)
class PathBatch:
    """Reproducible batch of account paths on an exercise-date grid.

    Paths are not stored; chunks are re-simulated on demand from the seed, so a
    batch of a million paths costs no memory and every consumer sees the exact
    same paths. "exact-lognormal" draws each step from the exact lognormal
    transition (time-only fees); "euler" is an Euler-Maruyama step on ln F with
    the fee frozen at the step's left endpoint (state-dependent fees allowed,
    paths stay strictly positive).
    """

    scn: Scenario
    seed: int
    npaths: int
    nsteps: int
    scheme: str = "exact-lognormal"

    def __post_init__(self) -> None:
        if self.npaths < 1 or self.nsteps < 1:
            raise ConfigError("npaths and nsteps must be positive")
        if self.scheme not in _SCHEMES:
            raise ConfigError(f"scheme must be one of {_SCHEMES}")
        if self.scheme == "exact-lognormal" and not self.scn.fee.is_time_only:
            raise UnsupportedScenarioError("exact-lognormal scheme needs a time-only fee")

    @property
    def tnodes(self) -> np.ndarray:
        return np.linspace(0.0, self.scn.contract.T, self.nsteps + 1)

    def _exact_step_drifts(self) -> np.ndarray:
        tn = self.tnodes
        r, sig = self.scn.market.r, self.scn.market.sigma
        dt = float(tn[1] - tn[0])
        fee_ints = np.array(
            [self.scn.fee.integral(float(a), float(b)) for a, b in zip(tn[:-1], tn[1:])]
        )
        return r * dt - fee_ints - 0.5 * sig * sig * dt

    def iter_chunks(self):
        """Yield (first_path_index, F) with F of shape (chunk, nsteps + 1)."""
        tn = self.tnodes
        dt = float(tn[1] - tn[0])
        sig = self.scn.market.sigma
        vol = sig * math.sqrt(dt)
        F0 = self.scn.contract.F0
        exact = self.scheme == "exact-lognormal"
        if exact:
            drifts = self._exact_step_drifts()
        nchunks = (self.npaths + CHUNK_PATHS - 1) // CHUNK_PATHS
        for ci in range(nchunks):
            npc = min(CHUNK_PATHS, self.npaths - ci * CHUNK_PATHS)
            rng = np.random.Generator(np.random.Philox(key=self.seed).jumped(ci))
            Z = rng.standard_normal((npc, self.nsteps))
            F = np.empty((npc, self.nsteps + 1))
            F[:, 0] = F0
            if exact:
                logF = math.log(F0) + np.cumsum(drifts[None, :] + vol * Z, axis=1)
                F[:, 1:] = np.exp(logF)
            else:
                r = self.scn.market.r
                for n in range(self.nsteps):
                    c = self.scn.fee(
                        float(tn[n]), F[:, n] if not self.scn.fee.is_time_only else None
                    )
                    F[:, n + 1] = F[:, n] * np.exp(
                        (r - np.asarray(c) - 0.5 * sig * sig) * dt + vol * Z[:, n]
                    )
            yield ci * CHUNK_PATHS, F

    def terminal_values(self) -> np.ndarray:
        return np.concatenate([F[:, -1] for _, F in self.iter_chunks()])

    def materialize(self) -> np.ndarray:
        """Full (npaths, nsteps + 1) path array; refuse absurd sizes."""
        if self.npaths * (self.nsteps + 1) > 1 << 26:
            raise ConfigError("batch too large to materialize; iterate chunks instead")
        return np.concatenate([F for _, F in self.iter_chunks()], axis=0)


def simulate_paths(
    scn: Scenario, seed: int, npaths: int, nsteps: int, scheme: str = "exact-lognormal"
) -> PathBatch:
    """Deterministic path batch; see PathBatch for the scheme semantics."""
    return PathBatch(scn=scn, seed=seed, npaths=npaths, nsteps=nsteps, scheme=scheme)


@dataclass(frozen=True)
class McEstimate:
    estimate: float
    std_error: float
    npaths: int
    seed: int


def _finalize(total: float, total_sq: float, n: int, seed: int) -> McEstimate:
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return McEstimate(estimate=mean, std_error=math.sqrt(var / n), npaths=n, seed=seed)


def mc_maturity_benefit(batch: PathBatch, scn: Scenario) -> McEstimate:
    """Sample mean and standard error of e^{-rT} max(G, F_T)."""
    r, G, T = scn.market.r, scn.contract.G, scn.contract.T
    disc = math.exp(-r * T)
    total = total_sq = 0.0
    for _, F in batch.iter_chunks():
        pay = disc * np.maximum(G, F[:, -1])
        total += float(np.sum(pay))
        total_sq += float(np.sum(pay * pay))
    return _finalize(total, total_sq, batch.npaths, batch.seed)


def mc_boundary_strategy_value(batch: PathBatch, scn: Scenario, boundary: Boundary) -> McEstimate:
    """Value of the stopping rule "surrender at the first exercise date with
    F >= b(t), else collect the maturity benefit": a lower bound on the
    contract value up to exercise-date discretization."""
    tn = batch.tnodes
    if boundary.values.shape[0] != batch.nsteps or not np.allclose(
        boundary.tnodes, tn, rtol=0.0, atol=1e-9
    ):
        raise ConfigError("boundary is not defined on the batch's exercise dates")
    r, G = scn.market.r, scn.contract.G
    b = np.asarray(boundary.values, dtype=float)
    disc = np.exp(-r * tn)
    time_only = scn.charge.is_time_only
    gvals = np.asarray(scn.charge(tn[:-1]), dtype=float) if time_only else None
    total = total_sq = 0.0
    for _, F in batch.iter_chunks():
        hits = F[:, :-1] >= b[None, :]
        hit_any = hits.any(axis=1)
        first = hits.argmax(axis=1)
        pay = disc[-1] * np.maximum(G, F[:, -1])
        if np.any(hit_any):
            rows = np.nonzero(hit_any)[0]
            n_hit = first[rows]
            F_hit = F[rows, n_hit]
            g_hit = gvals[n_hit] if time_only else np.asarray(
                scn.charge(tn[n_hit], F_hit), dtype=float
            )
            pay[rows] = disc[n_hit] * g_hit * F_hit
        total += float(np.sum(pay))
        total_sq += float(np.sum(pay * pay))
    return _finalize(total, total_sq, batch.npaths, batch.seed)


@dataclass(frozen=True)
class McPremiumEstimates:
    e_estimate: float
    e_std_error: float
    f_estimate: float
    f_std_error: float
    npaths: int
    seed: int


def _slice_thresholds(mask: RegionMask):
    """Per-slice surrender threshold when the slice is suffix-shaped, else None."""
    out = []
    for row in mask.in_surrender:
        hits = np.flatnonzero(row)
        if hits.size == 0:
            out.append(np.inf)
        elif bool(row[hits[0]:].all()):
            out.append(float(mask.xnodes[hits[0]]))
        else:
            out.append(None)
    return out


def mc_premium_integrals(batch: PathBatch, scn: Scenario, mask: RegionMask) -> McPremiumEstimates:
    """Path estimators of the surrender and continuation premiums at (0, F0).

    Works on arbitrary (possibly disconnected-in-time) masks: per step the
    indicator uses the slice threshold when the slice is threshold-shaped, and
    nearest-node mask membership otherwise. Time integration is per-step
    trapezoid with the region frozen at the step's left node, matching the
    decompose module's convention.
    """
    if not scn.is_time_only:
        raise UnsupportedScenarioError("premium integrals need time-only fee and charge")
    tn = batch.tnodes
    if mask.tnodes.size != tn.size or not np.allclose(mask.tnodes, tn, rtol=0.0, atol=1e-9):
        raise ConfigError("mask is not defined on the batch's exercise dates")
    N = batch.nsteps
    dt = float(tn[1] - tn[0])
    r = scn.market.r
    g = np.asarray(scn.charge(tn), dtype=float)
    gt = np.asarray(scn.charge.dt(tn), dtype=float)
    cL = np.asarray([scn.fee.rate_right(float(t)) for t in tn[:-1]])
    cR = np.asarray(scn.fee(tn[1:]), dtype=float)
    disc = np.exp(-r * tn)
    # per-step endpoint weights of the premium integrand (c g - g') e^{-r s}
    wL = 0.5 * dt * (cL * g[:-1] - gt[:-1]) * disc[:-1]
    wR = 0.5 * dt * (cR * g[1:] - gt[1:]) * disc[1:]
    thresholds = _slice_thresholds(mask)
    simple = np.array([th is not None for th in thresholds])
    K = np.array([th if th is not None else np.nan for th in thresholds])
    log_x0 = math.log(mask.xnodes[0])
    dy = math.log(mask.xnodes[1] / mask.xnodes[0])
    G, T = scn.contract.G, scn.contract.T
    discT = math.exp(-r * T)

    def indicators(F: np.ndarray) -> np.ndarray:
        ind = np.empty((F.shape[0], N), dtype=bool)
        cols = np.nonzero(simple)[0]
        ind[:, cols] = F[:, cols] >= K[cols][None, :]
        for n in np.nonzero(~simple)[0]:
            idx = np.clip(
                np.rint((np.log(F[:, n]) - log_x0) / dy).astype(int), 0, mask.xnodes.size - 1
            )
            ind[:, n] = mask.in_surrender[n][idx]
        return ind

    e_tot = e_sq = f_tot = f_sq = 0.0
    for _, F in batch.iter_chunks():
        indL = indicators(F[:, :-1])
        indR = indicators(F[:, 1:])  # right endpoint, region frozen at the left node
        e_path = (F[:, :-1] * indL) @ wL + (F[:, 1:] * indR) @ wR
        full_path = F[:, :-1] @ wL + F[:, 1:] @ wR
        put_path = discT * np.maximum(G - F[:, -1], 0.0)
        f_path = put_path + e_path - full_path
        e_tot += float(np.sum(e_path))
        e_sq += float(np.sum(e_path * e_path))
        f_tot += float(np.sum(f_path))
        f_sq += float(np.sum(f_path * f_path))
    ee = _finalize(e_tot, e_sq, batch.npaths, batch.seed)
    ff = _finalize(f_tot, f_sq, batch.npaths, batch.seed)
    return McPremiumEstimates(
        e_estimate=ee.estimate,
        e_std_error=ee.std_error,
        f_estimate=ff.estimate,
        f_std_error=ff.std_error,
        npaths=batch.npaths,
        seed=batch.seed,
    )
