"""Shared test fixtures for henon-symmetry-lab."""

import pytest

from henon_symmetry_lab import DiskGrid, RadialGrid, SolverOptions


@pytest.fixture
def options() -> SolverOptions:
    """Tighter than the defaults so level comparisons are not dominated by the stopping rule."""
    return SolverOptions(tol=1e-8, max_iter=20_000)


@pytest.fixture
def ball_grid() -> RadialGrid:
    """Radial grid on the unit ball in R^3."""
    return RadialGrid(3, 256)


@pytest.fixture
def small_disk() -> DiskGrid:
    """Coarse polar grid, cheap enough for full disk solves."""
    return DiskGrid(16, 32)
