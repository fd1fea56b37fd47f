"""Boundary caps: test functions concentrating at a boundary point.

The cap is ``φ(|x - x₀|/w)`` with ``φ(σ) = (1 - σ²)³`` and centre
``x₀ = (1 - w)e₁``, so its support touches the unit sphere at ``e₁``. Its
Rayleigh quotients are evaluated without a grid, by Gauss–Legendre
quadrature in the distance to the centre and the angle to ``e₁``, so the
construction works in every dimension.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np

from henon_symmetry_lab.errors import InvalidParameter
from henon_symmetry_lab.grids import DiskFunction, DiskGrid, sphere_area

DEFAULT_WIDTH_CONSTANT = 2.0
WIDTH_CONSTANTS = (0.5, 1.0, 2.0, 4.0, 8.0)
MAX_WIDTH = 0.5
QUADRATURE_POINTS = 96


def bump_width(alpha: float, c: float = DEFAULT_WIDTH_CONSTANT) -> float:
    """``min(1/2, c/α)``; doubling α halves the width once ``α > 2c``."""
    if alpha <= 0:
        return MAX_WIDTH
    return min(MAX_WIDTH, c / alpha)


def cap_profile(sigma: np.ndarray) -> np.ndarray:
    s = np.clip(sigma, 0.0, 1.0)
    return (1.0 - s**2) ** 3


def cap_derivative(sigma: np.ndarray) -> np.ndarray:
    s = np.clip(sigma, 0.0, 1.0)
    return -6.0 * s * (1.0 - s**2) ** 2


def cap_laplacian(sigma: np.ndarray, N: int) -> np.ndarray:
    """``Δφ`` in the unit-width variable: ``(1-σ²)(24σ² - 6N(1-σ²))``."""
    s = np.clip(sigma, 0.0, 1.0)
    return (1.0 - s**2) * (24.0 * s**2 - 6.0 * N * (1.0 - s**2))


@lru_cache(maxsize=8)
def _gauss(n: int, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _check_width(width: float) -> None:
    if not 0 < width <= MAX_WIDTH:
        raise InvalidParameter(f"cap width must lie in (0, 1/2], got {width}")


def cap_weighted_integral(
    N: int, width: float, a: float, integrand: Callable[[np.ndarray], np.ndarray], n: int = QUADRATURE_POINTS
) -> float:
    """``∫ |x|^a F(|x - x₀|/w) dx`` over the cap's support ball."""
    _check_width(width)
    sigma, w_sigma = _gauss(n, 0.0, 1.0)
    psi, w_psi = _gauss(n, 0.0, math.pi)
    S, P = np.meshgrid(sigma, psi, indexing="ij")
    d = 1.0 - width
    radius_sq = d**2 + (width * S) ** 2 + 2.0 * d * width * S * np.cos(P)
    weight = np.ones_like(radius_sq) if a == 0 else np.exp(0.5 * a * np.log(radius_sq))
    # N = 2 leaves a two-point sphere S^0 of measure 2
    angular = sphere_area(N - 1) * np.sin(P) ** (N - 2)
    values = integrand(S) * weight * angular * S ** (N - 1)
    return float(width**N * (w_sigma @ values @ w_psi))


def scalar_bump_quotient(N: int, alpha: float, p: float, width: float) -> float:
    """Scalar Rayleigh quotient ``∫|∇u|² / (∫|x|^α u^{p+1})^{2/(p+1)}`` of the cap."""
    _check_width(width)
    sigma, w_sigma = _gauss(QUADRATURE_POINTS, 0.0, 1.0)
    energy = sphere_area(N) * width ** (N - 2) * float(w_sigma @ (cap_derivative(sigma) ** 2 * sigma ** (N - 1)))
    mass = cap_weighted_integral(N, width, alpha, lambda s: cap_profile(s) ** (p + 1))
    return energy / mass ** (2.0 / (p + 1))


def system_bump_quotient(N: int, alpha: float, beta: float, p: float, q: float, width: float) -> float:
    """System quotient ``∫|x|^{-β(r-1)}|Δu|^r / (∫|x|^α u^{p+1})^{r/(p+1)}``, ``r = (q+1)/q``."""
    r = (q + 1.0) / q
    energy = width ** (-2.0 * r) * cap_weighted_integral(
        N, width, -beta * (r - 1.0), lambda s: np.abs(cap_laplacian(s, N)) ** r
    )
    mass = cap_weighted_integral(N, width, alpha, lambda s: cap_profile(s) ** (p + 1))
    return energy / mass ** (r / (p + 1))


def sample_cap(grid: DiskGrid, width: float) -> DiskFunction:
    """The cap centred at ``((1-w), 0)`` sampled on a polar grid."""
    _check_width(width)
    R, T = grid.mesh()
    x = R * np.cos(T) - (1.0 - width)
    y = R * np.sin(T)
    sigma = np.sqrt(x**2 + y**2) / width
    return DiskFunction(grid, np.where(sigma < 1.0, cap_profile(sigma), 0.0))
