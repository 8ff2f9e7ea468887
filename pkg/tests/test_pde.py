"""Variational-inequality solver and the smooth-fit diagnostic."""

from __future__ import annotations

import math

import numpy as np
import pytest

import vastop as vs
from vastop.model import ChargeSpec, ConfigError, ContractParams, FeeSpec, MarketParams, Scenario
from vastop.pde import SolverError
from vastop.surfaces import center_index

from conftest import maturity_benefit_surface


class TestSolveVariationalInequality:
    def test_terminal_slice_exact(self, c1_pde):
        surf = c1_pde["surface"]
        assert np.array_equal(surf.values[-1], np.maximum(100.0, surf.xnodes))

    def test_matched_rates_collapse(self, kc_scn, kc_wide):
        surf = kc_wide["pde"]
        h = maturity_benefit_surface(kc_scn, surf)
        rel = np.abs(surf.values - h) / np.maximum(h, 1e-12)
        assert float(rel.max()) <= 2e-3

    def test_projection_property(self, c1_pde, c2_pde):
        for bundle in (c1_pde, c2_pde):
            surf = bundle["surface"]
            assert float(np.min(surf.values - surf.obstacle)) >= -1e-12 * 100.0

    def test_complementarity(self, c1_pde):
        meta = c1_pde["surface"].metadata
        # free nodes solve the scheme to PSOR tolerance; active nodes only
        # overshoot in the feasible direction
        assert meta["complementarity_free_max"] <= 100.0 * meta["psor_tol"]
        assert meta["complementarity_active_min"] >= -100.0 * meta["psor_tol"]

    def test_cross_solver_agreement(self, c1_lattice, c1_pde):
        i0 = center_index(c1_pde["surface"].xnodes, 100.0)
        vp = c1_pde["surface"].values[0, i0]
        vl = c1_lattice["disc"].values[0, i0]
        assert abs(vp - vl) / vl <= 1e-3

    def test_cross_solver_agreement_nodewise(self, c1_lattice, c1_pde):
        vl = c1_lattice["disc"].values
        vp = c1_pde["surface"].values
        rel = np.abs(vl - vp) / np.maximum(np.abs(vp), 1.0)
        assert float(rel.max()) <= 2e-3

    def test_psor_failure_raises_with_residual(self, kc_scn):
        grid = vs.build_pde_grid(kc_scn, N=12, M=101, xmax_mult=8.0, max_iter=2)
        with pytest.raises(SolverError) as err:
            vs.solve_variational_inequality(kc_scn, grid)
        assert err.value.last_delta > 0.0

    def test_state_dependent_fee_marked_heuristic(self):
        T = 15.0
        scn = Scenario(
            market=MarketParams(r=0.03, sigma=0.2),
            contract=ContractParams(G=100.0, T=T, F0=100.0),
            fee=FeeSpec("state", rate_fn=lambda t, x: 0.02 * x / (x + 100.0), lipschitz=1.0),
            charge=ChargeSpec("exponential", T=T, kappa=0.0055),
        )
        grid = vs.build_pde_grid(scn, N=60, M=151, xmax_mult=8.0)
        surf = vs.solve_variational_inequality(scn, grid)
        assert surf.metadata["heuristic"] is True
        assert float(np.min(surf.values - surf.obstacle)) >= -1e-10

    def test_grid_validation(self, kc_scn):
        with pytest.raises(ConfigError):
            vs.build_pde_grid(kc_scn, N=12, M=51, theta=0.3)
        with pytest.raises(ConfigError):
            vs.build_pde_grid(kc_scn, N=12, M=51, omega=2.5)


class TestSmoothFit:
    def test_deep_region_slope_equals_charge_factor(self, c1_scn, c1_pde):
        surf = c1_pde["surface"]
        rep = vs.smooth_fit_diagnostic(surf, c1_scn, c1_pde["boundary"], times=[2.0])
        g2 = float(c1_scn.charge(2.0))
        assert rep.slope_right[0] == pytest.approx(g2, abs=1e-6)

    def test_empty_sections_skipped(self, c1_scn, c1_pde):
        rep = vs.smooth_fit_diagnostic(c1_pde["surface"], c1_scn, c1_pde["boundary"], times=[7.0])
        assert np.isnan(rep.jump[0])
        assert any("empty" in s for s in rep.skipped)

    def test_jump_shrinks_under_refinement(self, c1_scn):
        jumps = {}
        for M in (201, 401):
            grid = vs.build_pde_grid(c1_scn, N=180, M=M, xmax_mult=8.0)
            surf = vs.solve_variational_inequality(c1_scn, grid)
            mask = vs.extract_regions(surf, c1_scn)
            boundary = vs.extract_boundary(mask, surf)
            rep = vs.smooth_fit_diagnostic(surf, c1_scn, boundary, times=[2.0])
            jumps[M] = float(rep.jump[0])
        assert jumps[401] < jumps[201]
