"""Projected, preconditioned gradient descent for homogeneous quotients.

Minimizes ``R(u) = A(u) / D(u)^{a/d}``, where ``A`` is homogeneous of degree
``a`` and ``D`` of degree ``d``, on the sphere ``{D = 1}``. Each step
preconditions the constrained gradient with a symmetric positive definite
operator ``P(u)`` supplied by the problem, backtracks until the Armijo
condition holds, and rescales back onto the sphere. The relative KKT residual
``√(sᵀ∇R / (a·A))`` is independent of the grid and is the stopping criterion.

When ``P(u)u = ∇A(u)`` a unit step is one sweep of nonlinear inverse iteration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

from henon_symmetry_lab.config import SolverOptions
from henon_symmetry_lab.errors import NotConverged, ZeroDenominator

logger = logging.getLogger(__name__)

Solve = Callable[[np.ndarray], np.ndarray]


class QuotientProblem(Protocol):
    """What :func:`minimize_quotient` needs to know about a quotient."""

    numerator_degree: float
    denominator_degree: float

    def numerator(self, u: np.ndarray) -> float: ...

    def numerator_gradient(self, u: np.ndarray) -> np.ndarray: ...

    def denominator(self, u: np.ndarray) -> float: ...

    def denominator_gradient(self, u: np.ndarray) -> np.ndarray: ...

    def preconditioner(self, u: np.ndarray) -> Solve: ...

    @property
    def final(self) -> bool:
        """False while a regularization parameter still has to be annealed."""
        ...

    def anneal(self) -> bool:
        """Advance the regularization; return False once nothing is left to do."""
        ...


@dataclass
class DescentResult:
    u: np.ndarray
    level: float
    iterations: int
    grad_norm: float
    converged: bool


def normalize(problem: QuotientProblem, u: np.ndarray) -> np.ndarray:
    """Rescale ``u`` onto ``{D = 1}``."""
    denominator = problem.denominator(u)
    if not denominator > np.finfo(float).tiny:
        raise ZeroDenominator(f"weighted denominator vanished (D={denominator!r})")
    return u / denominator ** (1.0 / problem.denominator_degree)


def quotient(problem: QuotientProblem, u: np.ndarray) -> float:
    denominator = problem.denominator(u)
    if not denominator > np.finfo(float).tiny:
        raise ZeroDenominator(f"weighted denominator vanished (D={denominator!r})")
    ratio = problem.numerator_degree / problem.denominator_degree
    return problem.numerator(u) / denominator**ratio


def minimize_quotient(
    problem: QuotientProblem, u0: np.ndarray, options: Optional[SolverOptions] = None, label: str = "quotient"
) -> DescentResult:
    """Minimize a homogeneous quotient from ``u0``.

    Args:
        problem: The quotient, its gradients and its preconditioner.
        u0: Initial guess; any nonzero array of the problem's size.
        options: Tolerances; defaults to :class:`SolverOptions`.
        label: Name used in log messages.

    Returns:
        The best iterate, normalized to ``D = 1``, with its level.

    Raises:
        ZeroDenominator: If ``u0`` has a vanishing denominator.
        NotConverged: Only when ``options.strict`` is set.
    """
    options = options or SolverOptions()
    a, d = problem.numerator_degree, problem.denominator_degree
    u = normalize(problem, np.asarray(u0, dtype=float).copy())
    grad_norm = math.inf
    converged = False
    iteration = 0

    while iteration < options.max_iter:
        iteration += 1
        A = problem.numerator(u)
        residual = problem.numerator_gradient(u) - (a / d) * A * problem.denominator_gradient(u)
        step = problem.preconditioner(u)(residual)
        decrease = float(step @ residual)
        grad_norm = math.sqrt(max(decrease, 0.0) / (a * A)) if A > 0 else 0.0

        if options.log_every and iteration % options.log_every == 0:
            logger.debug("%s: iter=%d level=%.12g residual=%.3e", label, iteration, A, grad_norm)

        target = options.tol if problem.final else max(options.tol, options.stage_tol)
        if grad_norm <= target:
            if problem.final:
                converged = True
                break
            problem.anneal()
            continue

        tau = 1.0
        for _ in range(options.max_backtracks):
            trial = normalize(problem, u - tau * step)
            if problem.numerator(trial) <= A - options.armijo * tau * decrease:
                u = trial
                break
            tau *= options.backtrack
        else:
            if problem.final or not problem.anneal():
                logger.warning("%s: line search stalled at iter=%d, residual=%.3e", label, iteration, grad_norm)
                break

    level = problem.numerator(u)
    if not converged:
        logger.warning("%s: not converged after %d iterations (residual=%.3e)", label, iteration, grad_norm)
    result = DescentResult(u=u, level=level, iterations=iteration, grad_norm=grad_norm, converged=converged)
    if options.strict and not converged:
        raise NotConverged(f"{label} did not reach tol={options.tol} (residual={grad_norm:.3e})", result)
    logger.info("%s: level=%.12g after %d iterations", label, level, iteration)
    return result
