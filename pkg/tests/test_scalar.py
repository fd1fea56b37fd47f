"""Tests for scalar ground states on the ball and the disk."""

import math

import numpy as np
import pytest
from scipy.special import jn_zeros

from henon_symmetry_lab.config import SolverOptions
from henon_symmetry_lab.descent import minimize_quotient
from henon_symmetry_lab.errors import (
    GridMismatch,
    InvalidParameter,
    NotBracketed,
    NotConverged,
    SupercriticalExponent,
    WeightOutOfRange,
    ZeroDenominator,
)
from henon_symmetry_lab.grids import (
    DiskGrid,
    RadialFunction,
    RadialGrid,
    angular_variation,
    radial_cells_for,
    radial_lemma_check,
    weighted_integral,
)
from henon_symmetry_lab.scalar import (
    DEFAULT_MULTISTART,
    ScalarQuotient,
    ScanResult,
    boundary_bump,
    find_alpha_star,
    minimize_disk,
    minimize_radial,
    rayleigh_scalar,
    rayleigh_scalar_gradient,
    scalar_pohozaev_residual,
    scan_alpha,
)

# -- Quotient ----------------------------------------------------------------


class DescribeRayleighScalar:
    def it_is_invariant_under_scaling(self):
        u = RadialGrid(3, 32).sample(lambda r: np.cos(0.5 * math.pi * r))
        assert rayleigh_scalar(u.with_values(3.0 * u.values), 1.0, 3.0) == pytest.approx(rayleigh_scalar(u, 1.0, 3.0))

    def it_has_a_consistent_gradient(self):
        grid = RadialGrid(3, 12)
        rng = np.random.default_rng(7)
        step = 1e-5
        for _ in range(20):
            u = grid.sample(lambda r: (1 - r**2) * (1 + 0.3 * rng.uniform(-1.0, 1.0, size=r.shape)))
            i = int(rng.integers(grid.m))
            grad = rayleigh_scalar_gradient(u, 1.0, 3.0)
            bumped = u.values.copy()
            bumped[i] += step
            lowered = u.values.copy()
            lowered[i] -= step
            fd = (rayleigh_scalar(u.with_values(bumped), 1.0, 3.0) - rayleigh_scalar(u.with_values(lowered), 1.0, 3.0)) / (
                2 * step
            )
            assert grad[i] == pytest.approx(fd, rel=1e-6, abs=1e-8)

    def it_integrates_the_paraboloid(self):
        # ∫|∇u|² = 16π/5 and ∫u² = 32π/105 on the unit ball in R^3
        u = RadialGrid(3, 256).sample(lambda r: 1.0 - r**2)
        assert rayleigh_scalar(u, 0.0, 1.0) == pytest.approx(10.5, rel=2e-3)

    def it_refuses_a_vanishing_denominator(self):
        with pytest.raises(ZeroDenominator):
            rayleigh_scalar(RadialFunction(RadialGrid(3, 8), np.zeros(8)), 0.0, 3.0)

    def it_rejects_sublinear_exponents(self):
        u = RadialGrid(3, 8).sample(lambda r: 1 - r)
        with pytest.raises(InvalidParameter):
            rayleigh_scalar(u, 0.0, 0.5)


# -- Descent -----------------------------------------------------------------


class DescribeMinimizeQuotient:
    def it_raises_in_strict_mode_with_the_best_iterate(self):
        grid = RadialGrid(3, 64)
        problem = ScalarQuotient(grid, 0.0, 3.0)
        with pytest.raises(NotConverged) as info:
            minimize_quotient(problem, np.ones(64), SolverOptions(max_iter=1, strict=True))
        assert info.value.result is not None
        assert info.value.result.iterations == 1

    def it_refuses_a_zero_start(self):
        grid = RadialGrid(3, 16)
        with pytest.raises(ZeroDenominator):
            minimize_quotient(ScalarQuotient(grid, 0.0, 3.0), np.zeros(16))


# -- Radial ground states ----------------------------------------------------


class DescribeMinimizeRadial:
    def it_recovers_the_first_dirichlet_eigenvalue_of_the_ball(self, ball_grid: RadialGrid, options: SolverOptions):
        state = minimize_radial(3, 1.0, 0.0, ball_grid, options)
        assert state.converged
        assert state.level == pytest.approx(math.pi**2, rel=1e-3)

    def it_recovers_the_first_dirichlet_eigenvalue_of_the_disk(self, options: SolverOptions):
        state = minimize_radial(2, 1.0, 0.0, RadialGrid(2, 256), options)
        assert state.level == pytest.approx(jn_zeros(0, 1)[0] ** 2, rel=1e-3)

    def it_returns_a_positive_normalized_minimizer(self, ball_grid: RadialGrid, options: SolverOptions):
        state = minimize_radial(3, 3.0, 2.0, ball_grid, options)
        u = state.minimizer
        assert np.all(u.values > 0)
        assert weighted_integral(u.with_values(u.values**4), 2.0) == pytest.approx(1.0, rel=1e-10)
        assert state.to_dict()["N"] == 3

    def it_follows_the_planar_scaling_law(self, options: SolverOptions):
        # in the plane u(r) = v(r^{(2+α)/2}) maps the weighted problem onto α = 0
        grid = RadialGrid(2, 512)
        base = minimize_radial(2, 3.0, 0.0, grid, options).level
        weighted = minimize_radial(2, 3.0, 2.0, grid, options).level
        assert weighted / base == pytest.approx(2.0**1.5, rel=5e-3)

    def it_increases_with_alpha(self, options: SolverOptions):
        levels = [minimize_radial(3, 3.0, alpha, RadialGrid(3, 256), options).level for alpha in (0.0, 1.0, 4.0)]
        assert levels == sorted(levels)

    def it_rejects_supercritical_exponents(self):
        with pytest.raises(SupercriticalExponent):
            minimize_radial(3, 5.0, 0.0)
        minimize_radial(3, 5.0, 1.0, RadialGrid(3, 64), SolverOptions(max_iter=5))

    def it_rejects_a_grid_of_another_dimension(self):
        with pytest.raises(GridMismatch):
            minimize_radial(3, 3.0, 0.0, RadialGrid(2, 32))

    @pytest.mark.parametrize("alpha", [0.0, 5.0, 50.0])
    def it_respects_the_radial_decay_bound(self, alpha: float, options: SolverOptions):
        state = minimize_radial(3, 3.0, alpha, RadialGrid(3, radial_cells_for(3, alpha)), options)
        assert radial_lemma_check(state.minimizer).max_violation <= 0

    def it_satisfies_the_pohozaev_identity_in_the_limit(self, options: SolverOptions):
        coarse = scalar_pohozaev_residual(minimize_radial(3, 3.0, 1.0, RadialGrid(3, 128), options))
        fine = scalar_pohozaev_residual(minimize_radial(3, 3.0, 1.0, RadialGrid(3, 512), options))
        assert fine < 0.05
        assert fine < 0.5 * coarse


# -- Disk ground states ------------------------------------------------------


class DescribeMinimizeDisk:
    def it_agrees_with_the_radial_level_without_weight(self, small_disk: DiskGrid, options: SolverOptions):
        radial = minimize_radial(2, 3.0, 0.0, small_disk.radial, options)
        full = minimize_disk(3.0, 0.0, small_disk, options)
        assert full.init in DEFAULT_MULTISTART
        assert radial.level / full.level == pytest.approx(1.0, abs=1e-4)
        assert angular_variation(full.minimizer) < 1e-2

    def it_never_exceeds_the_radial_level_from_a_radial_start(self, small_disk: DiskGrid, options: SolverOptions):
        radial = minimize_radial(2, 3.0, 5.0, small_disk.radial, options)
        full = minimize_disk(3.0, 5.0, small_disk, options, init="radial")
        assert full.level <= radial.level * (1 + 1e-8)
        assert full.init == "radial"

    def it_never_exceeds_the_boundary_bump(self, small_disk: DiskGrid, options: SolverOptions):
        full = minimize_disk(3.0, 5.0, small_disk, options)
        assert full.level <= boundary_bump(5.0, 3.0, small_disk).level * (1 + 1e-8)

    def it_is_reproducible_for_a_seed(self, small_disk: DiskGrid):
        options = SolverOptions(tol=1e-6, seed=11)
        first = minimize_disk(3.0, 2.0, small_disk, options, init="random")
        second = minimize_disk(3.0, 2.0, small_disk, options, init="random")
        np.testing.assert_array_equal(first.minimizer.values, second.minimizer.values)

    def it_rejects_negative_weights(self, small_disk: DiskGrid):
        with pytest.raises(WeightOutOfRange):
            minimize_disk(3.0, -1.0, small_disk)

    @pytest.mark.slow
    def it_breaks_symmetry_for_large_alpha(self):
        grid = DiskGrid(48, 96)
        options = SolverOptions(tol=1e-6)
        radial = minimize_radial(2, 3.0, 30.0, grid.radial, options)
        full = minimize_disk(3.0, 30.0, grid, options)
        assert radial.level / full.level > 1.05
        assert angular_variation(full.minimizer) > 0.5


# -- Scans -------------------------------------------------------------------


class DescribeScanAlpha:
    def it_produces_one_row_per_alpha(self, small_disk: DiskGrid):
        scan = scan_alpha(3.0, [0.0, 2.0], small_disk, SolverOptions(tol=1e-6))
        assert isinstance(scan, ScanResult)
        assert [row.alpha for row in scan.rows] == [0.0, 2.0]
        assert np.all(np.abs(scan.ratios() - 1.0) < 0.02)
        assert scan.breaking_alphas(0.02) == []

    def it_solves_the_radial_leg_on_a_resolved_grid(self, small_disk: DiskGrid):
        options = SolverOptions(tol=1e-6)
        row = scan_alpha(3.0, [10.0], small_disk, options).rows[0]
        expected = minimize_radial(2, 3.0, 10.0, RadialGrid(2, radial_cells_for(2, 10.0)), options)
        coarse = minimize_radial(2, 3.0, 10.0, small_disk.radial, options)
        assert row.level_rad == pytest.approx(expected.level, rel=1e-12)
        assert row.level_rad != pytest.approx(coarse.level, rel=1e-6)

    def it_needs_increasing_alphas(self, small_disk: DiskGrid):
        with pytest.raises(InvalidParameter):
            scan_alpha(3.0, [2.0, 1.0], small_disk)


class DescribeFindAlphaStar:
    def it_reports_an_unbracketed_threshold(self, small_disk: DiskGrid):
        with pytest.raises(NotBracketed):
            find_alpha_star(3.0, SolverOptions(tol=1e-6), grid=small_disk, alpha_max=1.0, refine=False)

    @pytest.mark.slow
    def it_locates_the_onset_of_symmetry_breaking(self):
        estimate = find_alpha_star(3.0, SolverOptions(tol=1e-6), grid=DiskGrid(32, 64), alpha_max=60.0, refine=False)
        assert 0.0 < estimate.alpha_star < 60.0
        assert estimate.refined_grid is None
        assert estimate.relative_change == 0.0
