"""Radial ground states of the weighted Lane–Emden system.

The system ``-Δu = |x|^β v^q``, ``-Δv = |x|^α u^p`` on the unit ball is reduced
to one equation for ``u`` by eliminating ``v = (-Δu)^{1/q}|x|^{-β/q}``. Its
ground states minimize

    R(u) = ∫|x|^{-β(r-1)}|Δu|^r / (∫|x|^α|u|^{p+1})^{r/(p+1)},   r = (q+1)/q,

over radial ``u`` with ``u(1) = 0``; ``Δu = 0`` on the boundary comes out as the
natural condition. For ``r < 2`` the integrand ``|t|^r`` is replaced by
``(t² + ε²)^{r/2}`` and ε is annealed down to a floor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu, spsolve

from henon_symmetry_lab.bumps import WIDTH_CONSTANTS, bump_width, system_bump_quotient
from henon_symmetry_lab.config import SolverOptions
from henon_symmetry_lab.descent import minimize_quotient, normalize, quotient
from henon_symmetry_lab.errors import (
    GridMismatch,
    GridTooCoarse,
    HypothesisViolation,
    NegativeLaplacianBeyondTol,
    NotASolution,
    NotConverged,
)
from henon_symmetry_lab.exponents import DEFAULT_ON_TOL, ProblemSpec, hyperbola_gap, m_gap
from henon_symmetry_lab.grids import (
    MIN_RADIAL_CELLS,
    RadialFunction,
    RadialGrid,
    radial_cells_for,
    radial_laplacian,
    weighted_integral,
)

logger = logging.getLogger(__name__)

PohozaevBranch = Literal["hardy", "general", "critical"]


@dataclass(frozen=True)
class SystemSpec:
    """A :class:`ProblemSpec` together with ``r = (q+1)/q``."""

    base: ProblemSpec

    @classmethod
    def of(cls, N: int, p: float, q: float, alpha: float = 0.0, beta: float = 0.0) -> SystemSpec:
        return cls(ProblemSpec(N=N, alpha=alpha, beta=beta, p=p, q=q))

    @property
    def r(self) -> float:
        return (self.base.q + 1.0) / self.base.q

    @property
    def N(self) -> int:
        return self.base.N

    @property
    def p(self) -> float:
        return self.base.p

    @property
    def q(self) -> float:
        return self.base.q

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def beta(self) -> float:
        return self.base.beta

    def to_dict(self) -> dict:
        return {**self.base.to_dict(), "r": self.r}


@dataclass
class SystemGroundState:
    """A radial ground state pair.

    When ``p·q > 1`` the pair is rescaled so that both equations hold with unit
    constants and ``multiplier`` is 1. For the linear pair it stays normalized to
    ``∫|x|^α u^{p+1} = 1`` and ``multiplier`` is the level.
    """

    spec: SystemSpec
    u: RadialFunction
    v: RadialFunction
    level: float
    pohozaev_residual: float
    converged: bool
    iterations: int
    grad_norm: float
    multiplier: float
    el_residual: float

    def to_dict(self) -> dict:
        return {
            **self.spec.to_dict(),
            "level": self.level,
            "pohozaev_residual": self.pohozaev_residual,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "multiplier": self.multiplier,
            "el_residual": self.el_residual,
            "m": self.u.grid.m,
        }


@dataclass(frozen=True)
class PohozaevReport:
    """Both sides of the Pohozaev identity for a pair, with the weight-dependent gap.

    ``branch`` is ``"hardy"`` for nonpositive weights, ``"critical"`` on the
    hyperbola and ``"general"`` otherwise.
    """

    residual: float
    relative: float
    boundary_term: float
    gap: float
    mass: float
    branch: PohozaevBranch
    el_residual: Optional[float]


@dataclass(frozen=True)
class SymmetryCertificate:
    """Radial level against the best boundary-cap upper bound."""

    alpha: float
    rad_level: float
    bump_upper: float
    best_width: float
    breaks: bool

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "rad_level": self.rad_level,
            "bump_upper": self.bump_upper,
            "best_width": self.best_width,
            "breaks": self.breaks,
        }


class SystemQuotient:
    """Discrete second-order quotient with a lagged-weight preconditioner.

    With ``t = Δ_h u`` and ``c = w_β · r(t² + ε²)^{(r-2)/2}`` the operator
    ``P = Lᵀ diag(c) L`` satisfies ``P u = ∇A(u)``.
    """

    def __init__(self, grid: RadialGrid, spec: SystemSpec, eps: float = 0.0, eps_floor: float = 1e-8):
        self.grid = grid
        self.spec = spec
        self.r = spec.r
        self.numerator_degree = self.r
        self.denominator_degree = spec.p + 1.0
        volumes = grid.volumes
        self.laplacian = (sp.diags(-1.0 / volumes) @ grid.stiffness()).tocsc()
        self.w_alpha = grid.cell_weights(spec.alpha)
        self.w_beta = grid.cell_weights(-spec.beta * (self.r - 1.0))
        self.quadratic = math.isclose(self.r, 2.0)
        self.eps = 0.0 if self.quadratic else max(eps, eps_floor)
        self.eps_floor = eps_floor
        self._fixed_solve = None

    @property
    def final(self) -> bool:
        return self.quadratic or self.eps <= self.eps_floor

    def anneal(self) -> bool:
        if self.final:
            return False
        self.eps = max(0.5 * self.eps, self.eps_floor)
        logger.debug("regularization lowered to eps=%.3e", self.eps)
        return True

    def _energy_density(self, t: np.ndarray) -> np.ndarray:
        if self.quadratic:
            return t * t
        return (t * t + self.eps**2) ** (0.5 * self.r)

    def _coefficients(self, t: np.ndarray) -> np.ndarray:
        if self.quadratic:
            return 2.0 * self.w_beta
        return self.w_beta * self.r * (t * t + self.eps**2) ** (0.5 * (self.r - 2.0))

    def numerator(self, u: np.ndarray) -> float:
        return float(self.w_beta @ self._energy_density(self.laplacian @ u))

    def numerator_gradient(self, u: np.ndarray) -> np.ndarray:
        t = self.laplacian @ u
        return self.laplacian.T @ (self._coefficients(t) * t)

    def denominator(self, u: np.ndarray) -> float:
        return float(self.w_alpha @ np.abs(u) ** (self.spec.p + 1.0))

    def denominator_gradient(self, u: np.ndarray) -> np.ndarray:
        p = self.spec.p
        return (p + 1.0) * self.w_alpha * np.abs(u) ** (p - 1.0) * u

    def preconditioner(self, u: np.ndarray):
        if self.quadratic and self._fixed_solve is not None:
            return self._fixed_solve
        c = self._coefficients(self.laplacian @ u)
        operator = (self.laplacian.T @ sp.diags(c) @ self.laplacian).tocsc()
        solve = splu(operator).solve
        if self.quadratic:
            self._fixed_solve = solve
        return solve


# ---------------------------------------------------------------------------
# Quotient and hypotheses
# ---------------------------------------------------------------------------


def rayleigh_system(u: RadialFunction, spec: SystemSpec, eps: Optional[float] = None) -> float:
    """Discrete system quotient of ``u``; ``eps`` defaults to the annealing floor ``1e-8``.

    Raises:
        ZeroDenominator: If ``∫|x|^α|u|^{p+1}`` vanishes.
    """
    floor = SolverOptions().eps_floor
    problem = SystemQuotient(u.grid, spec, eps=floor if eps is None else eps, eps_floor=floor if eps is None else eps)
    return quotient(problem, u.values)


def check_radial_hypotheses(spec: SystemSpec) -> None:
    """Raise :class:`HypothesisViolation` outside the radial existence range."""
    gap = hyperbola_gap(spec.base)
    if not gap > DEFAULT_ON_TOL:
        raise HypothesisViolation(
            f"radial ground states need (N+alpha)/(p+1)+(N+beta)/(q+1)-(N-2) > 0, got gap={gap:.6g}"
        )
    if spec.beta > 0 and not spec.q > spec.beta / spec.N:
        raise HypothesisViolation(f"positive beta needs q > max(1, beta/N), got q={spec.q}, beta/N={spec.beta / spec.N}")


# ---------------------------------------------------------------------------
# Second component, residuals, Pohozaev
# ---------------------------------------------------------------------------


def recover_v(u: RadialFunction, spec: SystemSpec, tol: float = 1e-3) -> RadialFunction:
    """``v = max(0, -Δu)^{1/q} r^{-β/q}`` from the first equation.

    Args:
        u: Radial function.
        spec: The system.
        tol: Negative values of ``-Δu`` down to ``-tol·max|Δu|`` are clamped to 0.

    Raises:
        NegativeLaplacianBeyondTol: If ``u`` is not superharmonic within ``tol``.
    """
    minus_lap = -radial_laplacian(u).values
    scale = float(np.max(np.abs(minus_lap))) if minus_lap.size else 0.0
    worst = float(minus_lap.min()) if minus_lap.size else 0.0
    if worst < -tol * scale:
        raise NegativeLaplacianBeyondTol(f"-Δu reaches {worst:.6g} (tolerance {tol * scale:.3g}); u is not superharmonic")
    r = u.grid.nodes
    v = np.maximum(minus_lap, 0.0) ** (1.0 / spec.q) * r ** (-spec.beta / spec.q)
    return RadialFunction(u.grid, v)


def _relative_l1(residual: np.ndarray, rhs: np.ndarray, volumes: np.ndarray) -> float:
    num = float(volumes @ np.abs(residual))
    den = float(volumes @ np.abs(rhs))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def euler_lagrange_residual(u: RadialFunction, v: RadialFunction, spec: SystemSpec, multiplier: float = 1.0) -> float:
    """Cell-weighted L¹ relative residual of ``-Δv = λ|x|^α u^p`` and ``-Δu = |x|^β v^q``.

    Both weights are sampled at the cell centres, as in :func:`recover_v`.
    """
    if u.grid != v.grid:
        raise GridMismatch("u and v live on different grids")
    grid = u.grid
    volumes = grid.volumes
    rhs_v = multiplier * grid.nodes**spec.alpha * np.abs(u.values) ** spec.p
    rhs_u = grid.nodes**spec.beta * np.abs(v.values) ** spec.q
    res_v = -radial_laplacian(v).values - rhs_v
    res_u = -radial_laplacian(u).values - rhs_u
    return max(_relative_l1(res_v, rhs_v, volumes), _relative_l1(res_u, rhs_u, volumes))


def _pohozaev_gap(spec: SystemSpec) -> tuple:
    N, a, b, p, q = spec.N, spec.alpha, spec.beta, spec.p, spec.q
    if a <= 0 and b <= 0:
        gap, branch = -(N - 2) + (N - abs(a)) / (p + 1) + (N - abs(b)) / (q + 1), "hardy"
    else:
        gap, branch = hyperbola_gap(spec.base), "general"
    if abs(gap) <= DEFAULT_ON_TOL:
        branch = "critical"
    return gap, branch


def pohozaev_report(
    u: RadialFunction,
    v: RadialFunction,
    spec: SystemSpec,
    multiplier: float = 1.0,
    el_tol: Optional[float] = 1e-2,
) -> PohozaevReport:
    """Compare ``ω u'(1) v'(1)`` with ``gap · λ ∫|x|^α u^{p+1}``.

    Normal derivatives are backward differences across the last interior face,
    ``(u_{m-1} - u_{m-2})/h``, which carry an O(h) error since ``Δu(1) = 0``. On the
    critical hyperbola the gap is 0, so a pair with nonvanishing boundary
    derivatives cannot solve the system.

    Args:
        u: First component.
        v: Second component on the same grid.
        spec: The system.
        multiplier: Constant ``λ`` in ``-Δv = λ|x|^α u^p``.
        el_tol: Largest tolerated Euler–Lagrange residual; ``None`` skips the check.

    Raises:
        NotASolution: If the pair does not solve the system within ``el_tol``.
        GridTooCoarse: With fewer than three cells.
    """
    if u.grid != v.grid:
        raise GridMismatch("u and v live on different grids")
    if u.grid.m < MIN_RADIAL_CELLS:
        raise GridTooCoarse(f"the Pohozaev check needs m >= {MIN_RADIAL_CELLS}, got {u.grid.m}")
    el = None
    if el_tol is not None:
        el = euler_lagrange_residual(u, v, spec, multiplier)
        if el > el_tol:
            raise NotASolution(f"Euler-Lagrange residual {el:.3e} exceeds {el_tol:.3e}")
    grid = u.grid
    gap, branch = _pohozaev_gap(spec)
    du = (u.values[-1] - u.values[-2]) / grid.h
    dv = (v.values[-1] - v.values[-2]) / grid.h
    boundary = grid.surface_const * du * dv
    mass = weighted_integral(u.with_values(np.abs(u.values) ** (spec.p + 1.0)), spec.alpha)
    interior = gap * multiplier * mass
    residual = abs(boundary - interior)
    scale = max(abs(boundary), abs(interior))
    return PohozaevReport(
        residual=residual,
        relative=0.0 if scale == 0 else residual / scale,
        boundary_term=boundary,
        gap=gap,
        mass=mass,
        branch=branch,
        el_residual=el,
    )


def pohozaev_residual(
    u: RadialFunction, v: RadialFunction, spec: SystemSpec, multiplier: float = 1.0, el_tol: Optional[float] = 1e-2
) -> float:
    return pohozaev_report(u, v, spec, multiplier, el_tol).residual


# ---------------------------------------------------------------------------
# Minimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _NewtonResult:
    u: np.ndarray
    v: np.ndarray
    el_residual: float
    steps: int


def _newton_polish(
    grid: RadialGrid, spec: SystemSpec, u: RadialFunction, v: RadialFunction, options: SolverOptions, label: str
) -> Optional[_NewtonResult]:
    """Damped Newton on ``K u = V r^β v^q``, ``K v = V r^α u^p`` from a descent pair.

    Returns ``None`` when a step is not finite or leaves the positive cone.
    """
    K = grid.stiffness()
    volumes = grid.volumes
    w_alpha = volumes * grid.nodes**spec.alpha
    w_beta = volumes * grid.nodes**spec.beta
    p, q, m = spec.p, spec.q, grid.m

    def system(x: np.ndarray) -> np.ndarray:
        a, b = x[:m], x[m:]
        return np.concatenate([K @ a - w_beta * np.abs(b) ** q, K @ b - w_alpha * np.abs(a) ** p])

    def el(x: np.ndarray) -> float:
        return euler_lagrange_residual(u.with_values(x[:m]), v.with_values(x[m:]), spec)

    x = np.concatenate([u.values, v.values])
    residual = system(x)
    norm = float(np.linalg.norm(residual))
    error = el(x)
    steps = 0
    while error > options.newton_tol and steps < options.newton_max_iter:
        a, b = x[:m], x[m:]
        jacobian = sp.bmat(
            [
                [K, sp.diags(-w_beta * q * np.abs(b) ** (q - 1.0) * np.sign(b))],
                [sp.diags(-w_alpha * p * np.abs(a) ** (p - 1.0) * np.sign(a)), K],
            ],
            format="csc",
        )
        step = spsolve(jacobian, residual)
        if not np.all(np.isfinite(step)):
            logger.warning("%s: Newton step is not finite at step %d", label, steps)
            return None
        tau = 1.0
        for _ in range(options.max_backtracks):
            trial = x - tau * step
            trial_residual = system(trial)
            trial_norm = float(np.linalg.norm(trial_residual))
            if trial_norm <= (1.0 - options.armijo * tau) * norm:
                break
            tau *= options.backtrack
        else:
            logger.debug("%s: Newton line search stalled at el=%.3e", label, error)
            break
        x, residual, norm = trial, trial_residual, trial_norm
        steps += 1
        error = el(x)
        logger.debug("%s: newton step=%d tau=%.3g el=%.3e", label, steps, tau, error)
    if not np.all(x > 0):
        logger.warning("%s: Newton iterate left the positive cone", label)
        return None
    return _NewtonResult(x[:m].copy(), x[m:].copy(), error, steps)


def minimize_system_radial(
    spec: SystemSpec, grid: Optional[RadialGrid] = None, options: Optional[SolverOptions] = None
) -> SystemGroundState:
    """Radial ground state of the system and its second component.

    Args:
        spec: The system; must lie below the weighted hyperbola.
        grid: Radial grid; by default sized by :func:`radial_cells_for`.
        options: Solver tolerances and the ε schedule.

    Returns:
        The rescaled pair, its level and residual diagnostics.

    Raises:
        HypothesisViolation: Outside the radial existence range.
        NegativeLaplacianBeyondTol: If the minimizer is not superharmonic.
        NotConverged: In strict mode, if the descent or the Newton polishing falls short.
    """
    options = options or SolverOptions()
    check_radial_hypotheses(spec)
    grid = grid or RadialGrid(spec.N, radial_cells_for(spec.N, spec.alpha))
    if grid.N != spec.N:
        raise GridMismatch(f"grid is for N={grid.N}, system has N={spec.N}")

    pq = spec.p * spec.q
    superlinear = pq > 1 and not math.isclose(pq, 1.0)
    problem = SystemQuotient(grid, spec, eps_floor=options.eps_floor)
    u0 = normalize(problem, 1.0 - grid.nodes ** (2.0 * (spec.N + max(spec.alpha, 0.0)) / spec.N))
    if not problem.quadratic:
        problem.eps = max(options.eps_start * float(np.max(np.abs(problem.laplacian @ u0))), options.eps_floor)
    label = f"system N={spec.N} p={spec.p} q={spec.q} alpha={spec.alpha} beta={spec.beta}"
    descent_options = options.replace(tol=max(options.tol, options.handoff_tol), strict=False) if superlinear else options
    result = minimize_quotient(problem, u0, descent_options, label=label)

    values = np.abs(result.u if result.u.sum() >= 0 else -result.u)
    values = normalize(problem, values)
    level = problem.numerator(values)
    u = RadialFunction(grid, values)
    v = recover_v(u, spec)
    converged, iterations = result.converged, result.iterations

    if superlinear:
        c = level ** (spec.q / (pq - 1.0))
        u = u.with_values(c * u.values)
        v = v.with_values(c ** (1.0 / spec.q) * v.values)
        multiplier = 1.0
        polished = _newton_polish(grid, spec, u, v, options, label)
        if polished is None:
            logger.warning("%s: keeping the descent pair", label)
            converged = False
        else:
            u, v = u.with_values(polished.u), v.with_values(polished.v)
            level = quotient(problem, polished.u)
            converged = polished.el_residual <= max(options.newton_tol, options.tol)
            iterations += polished.steps
        if options.strict and not converged:
            raise NotConverged(f"{label}: Newton polishing did not reach el <= {options.tol}", result)
    else:
        multiplier = level

    report = pohozaev_report(u, v, spec, multiplier, el_tol=None)
    el = euler_lagrange_residual(u, v, spec, multiplier)
    logger.info("%s: level=%.12g pohozaev=%.3e el=%.3e", label, level, report.residual, el)
    return SystemGroundState(
        spec=spec,
        u=u,
        v=v,
        level=level,
        pohozaev_residual=report.residual,
        converged=converged,
        iterations=iterations,
        grad_norm=result.grad_norm,
        multiplier=multiplier,
        el_residual=el,
    )


def system_symmetry_certificate(
    spec: SystemSpec,
    grid: Optional[RadialGrid] = None,
    options: Optional[SolverOptions] = None,
    width_constants: Sequence[float] = WIDTH_CONSTANTS,
    radial: Optional[SystemGroundState] = None,
) -> SymmetryCertificate:
    """Compare the radial level with boundary caps of width ``c/α``.

    ``breaks`` is set when the cheapest cap beats the radial level by the
    relative ``options.margin``, so no ground state can be radial.
    A precomputed ``radial`` ground state of the same spec is reused.

    Raises:
        HypothesisViolation: If ``alpha < 0`` or the pair is not below the
            ground-state hyperbola of its weight case.
    """
    options = options or SolverOptions()
    N, p, q, alpha, beta = spec.N, spec.p, spec.q, spec.alpha, spec.beta
    if alpha < 0:
        raise HypothesisViolation(f"the symmetry certificate needs alpha >= 0, got {alpha}")
    if beta >= 0:
        gap = m_gap(spec.base)
        condition = "N/(p+1)+N/(q+1) > N-2"
    else:
        gap = N / (p + 1) + (N + beta) / (q + 1) - (N - 2)
        condition = "N/(p+1)+(N-|beta|)/(q+1) > N-2"
    if not gap > DEFAULT_ON_TOL:
        raise HypothesisViolation(f"ground states need {condition}, got gap={gap:.6g}")

    if radial is None:
        radial = minimize_system_radial(spec, grid, options)
    widths = sorted({bump_width(alpha, c) for c in width_constants})
    uppers = [system_bump_quotient(N, alpha, beta, p, q, w) for w in widths]
    best = int(np.argmin(uppers))
    breaks = uppers[best] < radial.level * (1.0 - options.margin)
    logger.info("alpha=%g: radial=%.8g cap=%.8g (w=%.4g) breaks=%s", alpha, radial.level, uppers[best], widths[best], breaks)
    return SymmetryCertificate(alpha, radial.level, uppers[best], widths[best], bool(breaks))
