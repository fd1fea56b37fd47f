"""Scalar Hénon ground states on the unit ball and the unit disk.

The quotient ``R(u) = ∫|∇u|² / (∫|x|^α |u|^{p+1})^{2/(p+1)}`` is minimized over
radial functions (any N) and over all functions on the disk (N = 2). Comparing
the two levels detects symmetry breaking of the ground state.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse.linalg import factorized

from henon_symmetry_lab.bumps import bump_width, sample_cap, scalar_bump_quotient
from henon_symmetry_lab.config import SolverOptions
from henon_symmetry_lab.descent import minimize_quotient, quotient
from henon_symmetry_lab.errors import (
    GridMismatch,
    InvalidParameter,
    NotBracketed,
    SupercriticalExponent,
    WeightOutOfRange,
)
from henon_symmetry_lab.exponents import ni_exponent
from henon_symmetry_lab.grids import (
    DiskFunction,
    DiskGrid,
    Grid,
    GridFunction,
    RadialFunction,
    RadialGrid,
    radial_cells_for,
    weighted_integral,
)

logger = logging.getLogger(__name__)

DiskInit = Literal["radial", "boundary_bump", "random"]
DEFAULT_MULTISTART: Tuple[DiskInit, ...] = ("radial", "boundary_bump", "random", "random")


class ScalarQuotient:
    """The discrete scalar quotient on a radial or disk grid, flattened."""

    numerator_degree = 2.0
    final = True

    def __init__(self, grid: Grid, alpha: float, p: float):
        self.grid = grid
        self.alpha = alpha
        self.p = p
        self.denominator_degree = p + 1.0
        self.stiffness = grid.stiffness()
        self.weights = grid.cell_weights(alpha).ravel()

    @cached_property
    def _solve(self):
        return factorized((2.0 * self.stiffness).tocsc())

    def numerator(self, u: np.ndarray) -> float:
        return float(u @ (self.stiffness @ u))

    def numerator_gradient(self, u: np.ndarray) -> np.ndarray:
        return 2.0 * (self.stiffness @ u)

    def denominator(self, u: np.ndarray) -> float:
        return float(self.weights @ np.abs(u) ** (self.p + 1.0))

    def denominator_gradient(self, u: np.ndarray) -> np.ndarray:
        return (self.p + 1.0) * self.weights * np.abs(u) ** (self.p - 1.0) * u

    def preconditioner(self, u: np.ndarray):
        return self._solve

    def anneal(self) -> bool:
        return False


@dataclass
class GroundState:
    """A minimizer normalized to ``∫|x|^α u^{p+1} = 1`` and its level."""

    level: float
    minimizer: GridFunction
    iterations: int
    grad_norm: float
    converged: bool
    alpha: float = 0.0
    p: float = 1.0
    init: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "alpha": self.alpha,
            "p": self.p,
            "N": self.minimizer.N,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "converged": self.converged,
            "init": self.init,
        }


@dataclass(frozen=True)
class ScanRow:
    """Radial and full disk levels at one α.

    The radial level is solved on ``max(m_r, radial_cells_for(2, α))`` cells.
    """

    alpha: float
    level_rad: float
    level_full: float
    ratio: float
    iters_rad: int
    iters_full: int
    init_full: Optional[str]


@dataclass
class ScanResult:
    """Radial and unconstrained disk levels along an α sweep."""

    p: float
    grid: Tuple[int, int]
    rows: List[ScanRow] = field(default_factory=list)

    CSV_COLUMNS = ("alpha", "level_rad", "level_full", "ratio", "iters_rad", "iters_full", "init_full")

    def ratios(self) -> np.ndarray:
        return np.array([row.ratio for row in self.rows])

    def breaking_alphas(self, delta: float) -> List[float]:
        return [row.alpha for row in self.rows if row.ratio > 1.0 + delta]


@dataclass(frozen=True)
class BumpResult:
    """Quotient of a boundary cap of the given width, with its samples on a disk grid."""

    function: Optional[DiskFunction]
    level: float
    width: float


@dataclass(frozen=True)
class AlphaStarEstimate:
    """Smallest α with ``S_rad/S_full > 1 + delta``; depends on the grid."""

    alpha_star: float
    coarse_alpha_star: float
    grid: Tuple[int, int]
    refined_grid: Optional[Tuple[int, int]]
    delta: float
    evaluations: int

    @property
    def relative_change(self) -> float:
        return abs(self.alpha_star - self.coarse_alpha_star) / max(self.coarse_alpha_star, 1e-300)


# ---------------------------------------------------------------------------
# Quotient
# ---------------------------------------------------------------------------


def _check_exponent(p: float) -> None:
    if not p >= 1:
        raise InvalidParameter(f"exponent p must be >= 1, got p={p}")


def rayleigh_scalar(u: GridFunction, alpha: float, p: float) -> float:
    """``∫|∇u|² / (∫|x|^α |u|^{p+1})^{2/(p+1)}`` on the grid of ``u``.

    Raises:
        ZeroDenominator: If the weighted ``(p+1)``-norm underflows.
        WeightNotIntegrable: If ``alpha <= -N``.
    """
    _check_exponent(p)
    return quotient(ScalarQuotient(u.grid, alpha, p), u.values.ravel())


def rayleigh_scalar_gradient(u: GridFunction, alpha: float, p: float) -> np.ndarray:
    """Gradient of :func:`rayleigh_scalar` with respect to the nodal values."""
    _check_exponent(p)
    problem = ScalarQuotient(u.grid, alpha, p)
    flat = u.values.ravel()
    E, D = problem.numerator(flat), problem.denominator(flat)
    scale = D ** (-2.0 / (p + 1.0))
    grad = scale * (problem.numerator_gradient(flat) - (2.0 / (p + 1.0)) * (E / D) * problem.denominator_gradient(flat))
    return grad.reshape(u.values.shape)


def _ground_state(problem: ScalarQuotient, result, template: GridFunction, init: Optional[str]) -> GroundState:
    values = result.u if result.u.sum() >= 0 else -result.u
    values = np.abs(values)
    values = values / problem.denominator(values) ** (1.0 / problem.denominator_degree)
    minimizer = template.with_values(values.reshape(template.values.shape))
    return GroundState(
        level=problem.numerator(values),
        minimizer=minimizer,
        iterations=result.iterations,
        grad_norm=result.grad_norm,
        converged=result.converged,
        alpha=problem.alpha,
        p=problem.p,
        init=init,
    )


# ---------------------------------------------------------------------------
# Radial minimization
# ---------------------------------------------------------------------------


def minimize_radial(
    N: int, p: float, alpha: float, grid: Optional[RadialGrid] = None, options: Optional[SolverOptions] = None
) -> GroundState:
    """Minimize the scalar quotient over radial functions.

    Args:
        N: Dimension.
        p: Exponent, ``p >= 1`` (``p = 1`` is the weighted eigenvalue problem).
        alpha: Weight exponent, ``alpha > -N``.
        grid: Radial grid; by default sized by :func:`radial_cells_for`.
        options: Solver tolerances.

    Returns:
        The radial ground state with level ``S_rad``.

    Raises:
        SupercriticalExponent: If ``N >= 3`` and ``p + 1 >= 2*_α``.
        WeightOutOfRange: If ``alpha <= -N``.

    Example:
        ```python
        state = minimize_radial(3, 1.0, 0.0, RadialGrid(3, 256))
        assert abs(state.level - math.pi**2) < 0.1
        ```
    """
    _check_exponent(p)
    if not alpha > -N:
        raise WeightOutOfRange(f"weight alpha={alpha} must exceed -N={-N}")
    if N >= 3 and not p + 1 < ni_exponent(N, alpha):
        raise SupercriticalExponent(f"p+1={p + 1} must be below 2*_alpha={ni_exponent(N, alpha):.6g} for N={N}")
    grid = grid or RadialGrid(N, radial_cells_for(N, alpha))
    if grid.N != N:
        raise GridMismatch(f"grid is for N={grid.N}, problem has N={N}")

    problem = ScalarQuotient(grid, alpha, p)
    u0 = 1.0 - grid.nodes ** (2.0 * (N + alpha) / N)
    result = minimize_quotient(problem, u0, options, label=f"radial N={N} p={p} alpha={alpha}")
    return _ground_state(problem, result, RadialFunction(grid, u0), None)


# ---------------------------------------------------------------------------
# Disk minimization
# ---------------------------------------------------------------------------


def _resolved_width(alpha: float, grid: DiskGrid) -> float:
    return min(0.5, max(bump_width(alpha), 3.0 / grid.m_r))


def boundary_bump(
    alpha: float, p: float, grid: Optional[DiskGrid] = None, width: Optional[float] = None, N: int = 2
) -> BumpResult:
    """Boundary cap concentrating at ``e₁`` and its scalar quotient.

    With a disk grid the cap is sampled and its discrete quotient returned
    (and it is the ``boundary_bump`` start of :func:`minimize_disk`). Without a
    grid the quotient is integrated directly in dimension ``N``.
    """
    _check_exponent(p)
    if grid is None:
        width = bump_width(alpha) if width is None else width
        return BumpResult(None, scalar_bump_quotient(N, alpha, p, width), width)
    width = _resolved_width(alpha, grid) if width is None else width
    cap = sample_cap(grid, width)
    return BumpResult(cap, rayleigh_scalar(cap, alpha, p), width)


def _disk_start(grid: DiskGrid, alpha: float, p: float, kind: DiskInit, rng: np.random.Generator) -> np.ndarray:
    R, _ = grid.mesh()
    if kind == "radial":
        return 1.0 - R ** (2.0 + alpha)
    if kind == "boundary_bump":
        return boundary_bump(alpha, p, grid).function.values
    if kind == "random":
        return (1.0 - R**2) * (1.0 + 0.5 * rng.uniform(-1.0, 1.0, size=grid.shape))
    raise ValueError(f"unknown disk initialisation {kind!r}")


def minimize_disk(
    p: float,
    alpha: float,
    grid: DiskGrid,
    options: Optional[SolverOptions] = None,
    init: Optional[Union[DiskInit, Sequence[DiskInit]]] = None,
) -> GroundState:
    """Minimize the scalar quotient over all functions on the unit disk.

    Args:
        p: Exponent, ``p >= 1``.
        alpha: Weight exponent, ``alpha >= 0``.
        grid: Polar grid.
        options: Solver tolerances; ``options.seed`` drives the random starts.
        init: One start or a multistart set; defaults to radial, boundary
            bump and two random starts.

    Returns:
        The lowest-level result over the starts, tagged with its start.
    """
    _check_exponent(p)
    if alpha < 0:
        raise WeightOutOfRange(f"disk minimization expects alpha >= 0, got {alpha}")
    options = options or SolverOptions()
    starts: Sequence[DiskInit] = DEFAULT_MULTISTART if init is None else ((init,) if isinstance(init, str) else init)
    problem = ScalarQuotient(grid, alpha, p)
    template = DiskFunction(grid, np.zeros(grid.shape))

    best: Optional[GroundState] = None
    for k, kind in enumerate(starts):
        rng = np.random.default_rng(options.seed + k)
        u0 = _disk_start(grid, alpha, p, kind, rng).ravel()
        result = minimize_quotient(problem, u0, options, label=f"disk p={p} alpha={alpha} init={kind}")
        state = _ground_state(problem, result, template, kind)
        logger.debug("disk start %s: level=%.12g converged=%s", kind, state.level, state.converged)
        if best is None or state.level < best.level:
            best = state
    return best


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------


def _scan_row(task: Tuple[float, float, int, int, SolverOptions]) -> ScanRow:
    p, alpha, m_r, m_t, options = task
    grid = DiskGrid(m_r, m_t)
    radial = minimize_radial(2, p, alpha, RadialGrid(2, max(m_r, radial_cells_for(2, alpha))), options)
    full = minimize_disk(p, alpha, grid, options)
    ratio = radial.level / full.level
    logger.info("alpha=%g: S_rad=%.10g S_full=%.10g ratio=%.6f", alpha, radial.level, full.level, ratio)
    return ScanRow(alpha, radial.level, full.level, ratio, radial.iterations, full.iterations, full.init)


def scan_alpha(
    p: float, alphas: Sequence[float], grid: DiskGrid, options: Optional[SolverOptions] = None, jobs: int = 1
) -> ScanResult:
    """Radial versus full disk levels for each α (independent solves, optionally in parallel)."""
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise InvalidParameter("alphas must be strictly increasing")
    options = options or SolverOptions()
    tasks = [(p, alpha, grid.m_r, grid.m_t, options) for alpha in alphas]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scan_row, tasks))
    else:
        rows = [_scan_row(task) for task in tasks]
    return ScanResult(p=p, grid=grid.shape, rows=rows)


def _bisect_threshold(
    p: float, lo: float, hi: float, grid: DiskGrid, options: SolverOptions, rel_tol: float, max_steps: int
) -> Tuple[float, int]:
    threshold = 1.0 + options.delta

    def ratio(alpha: float) -> float:
        return _scan_row((p, alpha, grid.m_r, grid.m_t, options)).ratio

    if ratio(hi) <= threshold:
        raise NotBracketed(f"ratio stays <= {threshold} up to alpha={hi} on grid {grid.shape}")
    if ratio(lo) > threshold:
        raise NotBracketed(f"ratio already exceeds {threshold} at alpha={lo} on grid {grid.shape}")
    evaluations = 2
    while hi - lo > rel_tol * hi and evaluations < max_steps + 2:
        mid = 0.5 * (lo + hi)
        if ratio(mid) > threshold:
            hi = mid
        else:
            lo = mid
        evaluations += 1
    return hi, evaluations


def find_alpha_star(
    p: float,
    options: Optional[SolverOptions] = None,
    grid: Optional[DiskGrid] = None,
    alpha_min: float = 0.0,
    alpha_max: float = 400.0,
    refine: bool = True,
    rel_tol: float = 0.02,
    max_steps: int = 16,
) -> AlphaStarEstimate:
    """Bisect for the smallest α with ``S_rad/S_full > 1 + options.delta``.

    After the coarse bisection the grid is refined once (both counts doubled)
    and the search is repeated around the coarse estimate.

    Raises:
        NotBracketed: If the threshold is not crossed inside ``[alpha_min, alpha_max]``.
    """
    options = options or SolverOptions()
    grid = grid or DiskGrid(128, 128)
    coarse, evaluations = _bisect_threshold(p, alpha_min, alpha_max, grid, options, rel_tol, max_steps)
    logger.info("coarse alpha* estimate %.6g on grid %s", coarse, grid.shape)
    if not refine:
        return AlphaStarEstimate(coarse, coarse, grid.shape, None, options.delta, evaluations)

    fine = DiskGrid(2 * grid.m_r, 2 * grid.m_t)
    try:
        refined, more = _bisect_threshold(
            p, max(alpha_min, coarse / 1.5), min(alpha_max, coarse * 1.5), fine, options, rel_tol, max_steps
        )
    except NotBracketed:
        logger.warning("refined grid moved the crossing out of the local bracket, searching the full interval")
        refined, more = _bisect_threshold(p, alpha_min, alpha_max, fine, options, rel_tol, max_steps)
    return AlphaStarEstimate(refined, coarse, grid.shape, fine.shape, options.delta, evaluations + more)


# ---------------------------------------------------------------------------
# Pohozaev check
# ---------------------------------------------------------------------------


def scalar_pohozaev_residual(state: GroundState) -> float:
    """Relative defect of ``½ω u'(1)² = S[(N+α)/(p+1) - (N-2)/2]∫|x|^α u^{p+1}``.

    ``u'(1)`` is the one-sided difference ``-2u_{m-1}/h``. It equals the
    discrete flux through the boundary face, so the defect of a converged radial
    ground state shrinks like ``h²``.
    """
    u = state.minimizer
    if not isinstance(u, RadialFunction):
        raise TypeError("the Pohozaev check needs a radial minimizer")
    N, h = u.grid.N, u.grid.h
    slope = -2.0 * u.values[-1] / h
    boundary = 0.5 * u.grid.surface_const * slope**2
    mass = weighted_integral(u.with_values(np.abs(u.values) ** (state.p + 1.0)), state.alpha)
    interior = state.level * ((N + state.alpha) / (state.p + 1.0) - (N - 2) / 2.0) * mass
    scale = max(abs(boundary), abs(interior))
    return 0.0 if scale == 0 else abs(boundary - interior) / scale
