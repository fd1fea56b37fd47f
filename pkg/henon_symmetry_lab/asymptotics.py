"""Scaling laws of the ground-state levels in α.

Fits log–log slopes to level sweeps, evaluates the radial levels and the
boundary-cap upper bounds along geometric α grids, and checks the change of
variables ``v(ρ) = u(ρ^ε)``, ``ε = N/(N+α)``, that flattens the Hénon weight.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, stats
from scipy.special import gamma

from henon_symmetry_lab.bumps import WIDTH_CONSTANTS, bump_width, scalar_bump_quotient, system_bump_quotient
from henon_symmetry_lab.config import SolverOptions
from henon_symmetry_lab.errors import (
    DegenerateExponent,
    FileAccessError,
    InsufficientData,
    InvalidParameter,
    MalformedFile,
    NonPositiveData,
    WeightOutOfRange,
)
from henon_symmetry_lab.exponents import TheoreticalSlopes, theoretical_slopes
from henon_symmetry_lab.grids import RadialFunction, RadialGrid, radial_cells_for, weighted_integral
from henon_symmetry_lab.scalar import minimize_radial
from henon_symmetry_lab.system import SystemSpec, minimize_system_radial

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 4
SweepKind = Literal["scalar", "system"]


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of ``log(level)`` against ``log(alpha)``."""

    slope: float
    intercept: float
    half_width: float
    n_points: int

    def agrees_with(self, theory: float, band: float) -> bool:
        return abs(self.slope - theory) <= band

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "half_width": self.half_width, "n_points": self.n_points}


@dataclass(frozen=True)
class SubstitutionResult:
    """The resampled ``v`` on the ρ grid, the exponent ε and the gap between both integrals."""

    v: RadialFunction
    epsilon: float
    identity_gap: float


@dataclass(frozen=True)
class DominatedLimitReport:
    """Integrals of the ε-family against their Γ-function limit, per ε."""

    limit: float
    exponent: float
    eps: Tuple[float, ...]
    integrals: Tuple[float, ...]
    errors: Tuple[float, ...]
    monotone: bool
    dominated: bool

    @property
    def final_error(self) -> float:
        return self.errors[-1]


@dataclass(frozen=True)
class SweepPoint:
    """Radial level and cheapest boundary-cap bound at one α."""

    alpha: float
    rad_level: float
    bump_upper: float
    converged: bool


@dataclass
class SweepResult:
    kind: SweepKind
    N: int
    p: float
    q: Optional[float]
    beta: float
    points: List[SweepPoint] = field(default_factory=list)

    def radial_fit(self) -> SlopeFit:
        return fit_log_slope([(pt.alpha, pt.rad_level) for pt in self.points])

    def bump_fit(self) -> SlopeFit:
        return fit_log_slope([(pt.alpha, pt.bump_upper) for pt in self.points])

    def theory(self) -> TheoreticalSlopes:
        return theoretical_slopes(self.N, self.p, self.q)


def fit_log_slope(points: Sequence[Tuple[float, float]]) -> SlopeFit:
    """Ordinary least squares of ``log(level)`` on ``log(alpha)`` with a 95% interval.

    Raises:
        NonPositiveData: If any alpha or level is not positive.
        InsufficientData: With fewer than four points.
    """
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or data.shape[0] < MIN_FIT_POINTS:
        raise InsufficientData(f"a slope fit needs at least {MIN_FIT_POINTS} points, got {len(points)}")
    if np.any(data <= 0) or not np.all(np.isfinite(data)):
        raise NonPositiveData("alphas and levels must be finite and positive for a log-log fit")
    x, y = np.log(data[:, 0]), np.log(data[:, 1])
    fit = stats.linregress(x, y)
    n = data.shape[0]
    half_width = float(stats.t.ppf(0.975, n - 2) * fit.stderr)
    return SlopeFit(float(fit.slope), float(fit.intercept), abs(half_width), n)


def geometric_alphas(lo: float, hi: float, ratio: float = math.sqrt(2.0), min_points: int = 8) -> np.ndarray:
    """Geometric α grid from ``lo`` to ``hi`` with step at most ``ratio``."""
    if not 0 < lo < hi:
        raise InvalidParameter(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    n = max(min_points, int(math.ceil(math.log(hi / lo) / math.log(ratio))) + 1)
    return np.geomspace(lo, hi, n)


def henon_substitution(u: RadialFunction, alpha: float, p: float = 1.0, m_rho: Optional[int] = None) -> SubstitutionResult:
    """Resample ``v(ρ) = u(ρ^ε)`` and measure the weight-flattening identity.

    ``∫|x|^α|u|^{p+1} = ε ω ∫₀¹ |v|^{p+1} ρ^{N-1} dρ``; the reported
    ``identity_gap`` is the absolute difference of both sides on the grids.
    """
    N = u.grid.N
    if not alpha > -N:
        raise WeightOutOfRange(f"weight alpha={alpha} must exceed -N={-N}")
    epsilon = N / (N + alpha)
    rho_grid = RadialGrid(N, m_rho or u.grid.m)
    xp = np.append(u.grid.nodes, 1.0)
    fp = np.append(u.values, 0.0)
    v = RadialFunction(rho_grid, np.interp(rho_grid.nodes**epsilon, xp, fp))
    lhs = weighted_integral(u.with_values(np.abs(u.values) ** (p + 1.0)), alpha)
    rhs = epsilon * weighted_integral(v.with_values(np.abs(v.values) ** (p + 1.0)), 0.0)
    return SubstitutionResult(v, epsilon, abs(lhs - rhs))


def dominated_limit_check(
    p: float, N: int, eps_list: Sequence[float], q: float = 3.0, beta: float = 0.0
) -> DominatedLimitReport:
    """Integrals of ``g_ε(t) = |(t^{εk} - 1)/(εk)|^{p+1} t^{N-1}`` as ε decreases.

    Here ``k = 2 - N + (N+β)/(q+1)``. The integrals tend to
    ``∫₀¹ (-log t)^{p+1} t^{N-1} dt = Γ(p+2)/N^{p+2}``. Domination by
    ``(-log t)^{p+1}`` is sampled on ``(0, 1)``; it holds exactly when ``k > 0``.

    Raises:
        DegenerateExponent: If ``q + 1 = (N+β)/(N-2)``, i.e. ``k = 0``.
    """
    eps = [float(e) for e in eps_list]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise InvalidParameter("eps_list must be positive and strictly decreasing")
    k = 2.0 - N + (N + beta) / (q + 1.0)
    if abs(k) < 1e-12:
        raise DegenerateExponent(f"q+1={q + 1} equals (N+beta)/(N-2); the exponent of t vanishes")
    limit = float(gamma(p + 2.0)) / N ** (p + 2.0)

    def integral(e: float) -> float:
        ek = e * k

        def integrand(s: float) -> float:
            return abs(math.expm1(-ek * s) / ek) ** (p + 1.0) * math.exp(-N * s)

        value, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
        return value

    integrals = [integral(e) for e in eps]
    errors = [abs(value - limit) for value in integrals]
    monotone = all(b <= a * (1.0 + 1e-9) + 1e-15 for a, b in zip(errors, errors[1:]))

    s = np.linspace(1e-3, 60.0, 2000)
    dominated = all(bool(np.all(np.abs(np.expm1(-e * k * s) / (e * k)) <= s * (1.0 + 1e-12))) for e in eps)
    return DominatedLimitReport(limit, k, tuple(eps), tuple(integrals), tuple(errors), monotone, dominated)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def _sweep_point(task: Tuple[SweepKind, int, float, Optional[float], float, float, SolverOptions]) -> SweepPoint:
    kind, N, p, q, beta, alpha, options = task
    widths = sorted({bump_width(alpha, c) for c in WIDTH_CONSTANTS})
    if kind == "scalar":
        state = minimize_radial(N, p, alpha, RadialGrid(N, radial_cells_for(N, alpha)), options)
        upper = min(scalar_bump_quotient(N, alpha, p, w) for w in widths)
        return SweepPoint(alpha, state.level, upper, state.converged)
    spec = SystemSpec.of(N, p, q, alpha=alpha, beta=beta)
    state = minimize_system_radial(spec, RadialGrid(N, radial_cells_for(N, alpha)), options)
    upper = min(system_bump_quotient(N, alpha, beta, p, q, w) for w in widths)
    return SweepPoint(alpha, state.level, upper, state.converged)


def sweep_levels(
    kind: SweepKind,
    N: int,
    p: float,
    alphas: Sequence[float],
    q: Optional[float] = None,
    beta: float = 0.0,
    options: Optional[SolverOptions] = None,
    jobs: int = 1,
) -> SweepResult:
    """Radial levels and cap upper bounds along ``alphas``."""
    if kind == "system" and q is None:
        raise InvalidParameter("a system sweep needs q")
    options = options or SolverOptions()
    tasks = [(kind, N, p, q, beta, float(alpha), options) for alpha in alphas]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_sweep_point, tasks))
    else:
        points = [_sweep_point(task) for task in tasks]
    for point in points:
        logger.info("%s sweep alpha=%g: radial=%.8g cap=%.8g", kind, point.alpha, point.rad_level, point.bump_upper)
    return SweepResult(kind, N, p, q, beta, points)


def read_level_csv(path: Union[str, Path], column: str = "level") -> List[Tuple[float, float]]:
    """Read ``(alpha, level)`` pairs from a CSV with an ``alpha`` column.

    Raises:
        FileAccessError: If the file is missing or unreadable.
        MalformedFile: If a column is missing or a value is not a number.
    """
    try:
        with Path(path).open(newline="", encoding="utf-8") as stream:
            reader = csv.DictReader(line for line in stream if not line.startswith("#"))
            fields = reader.fieldnames or []
            rows = list(reader)
    except OSError as exc:
        raise FileAccessError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if "alpha" not in fields or column not in fields:
        raise MalformedFile(f"{path} needs columns 'alpha' and {column!r}")
    try:
        return [(float(row["alpha"]), float(row[column])) for row in rows]
    except (TypeError, ValueError) as exc:
        raise MalformedFile(f"{path} holds a non-numeric {column!r} or 'alpha' entry") from exc
