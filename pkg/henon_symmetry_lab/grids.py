"""Cell-centred grids on the unit ball and the unit disk.

Radial functions live on ``r_i = (i + 1/2)/m`` for any dimension ``N``; full
functions on the disk live on the polar product grid ``(r_i, θ_j)`` with
``θ_j = 2πj/m_t``. Both vanish at ``r = 1``.

Weights ``|x|^a`` are integrated exactly over each cell, so quadrature of
constants is exact for every ``a > -N`` and the Hardy range costs no accuracy.
The Dirichlet energy is a symmetric quadratic form ``uᵀKu`` and the discrete
Laplacian is ``-Ku / V`` with ``V`` the cell volumes, which makes discrete
integration by parts exact.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import IO, Callable, Iterable, List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import gamma

from henon_symmetry_lab.errors import (
    DimensionTooSmall,
    FileAccessError,
    GridMismatch,
    GridTooCoarse,
    InvalidParameter,
    MalformedFile,
    WeightNotIntegrable,
)

logger = logging.getLogger(__name__)

MIN_RADIAL_CELLS = 3
MIN_ANGULAR_CELLS = 8


def sphere_area(N: int) -> float:
    """Surface area ``ω_{N-1} = 2π^{N/2}/Γ(N/2)`` of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / float(gamma(N / 2.0))


def _power_cell_integrals(m: int, s: float) -> np.ndarray:
    """``((i+1)h)^s - (ih)^s`` for every cell, with ``s > 0``."""
    edges = np.arange(m + 1, dtype=float) / m
    powered = edges**s
    return np.diff(powered)


def _check_weight(a: float, N: int) -> None:
    if not a > -N:
        raise WeightNotIntegrable(f"|x|^{a} is not integrable near 0 in dimension N={N} (need a > -N)")


# ---------------------------------------------------------------------------
# Radial grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialGrid:
    """Cell-centred grid on ``[0, 1]`` for radial functions in dimension ``N``."""

    N: int
    m: int

    def __post_init__(self) -> None:
        if self.N < 1:
            raise DimensionTooSmall(f"dimension N must be >= 1, got {self.N}")
        if self.m < 1:
            raise GridTooCoarse(f"radial grid needs at least one cell, got m={self.m}")

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.m, dtype=float) + 0.5) / self.m

    @property
    def faces(self) -> np.ndarray:
        """Outer cell faces ``(i+1)h``; the last one is the boundary ``r = 1``."""
        return np.arange(1, self.m + 1, dtype=float) / self.m

    @property
    def surface_const(self) -> float:
        return sphere_area(self.N)

    @property
    def volumes(self) -> np.ndarray:
        return self.cell_weights(0.0)

    def cell_weights(self, a: float) -> np.ndarray:
        """Exact cell integrals of ``|x|^a``: ``ω((r+h/2)^{a+N} - (r-h/2)^{a+N})/(a+N)``."""
        return _radial_weights(self, float(a)).copy()

    def stiffness(self) -> sp.csc_matrix:
        """Symmetric tridiagonal ``K`` with ``uᵀKu`` the discrete Dirichlet energy."""
        return _radial_stiffness(self)

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> RadialFunction:
        return RadialFunction(self, np.asarray(fn(self.nodes), dtype=float))


@lru_cache(maxsize=256)
def _radial_weights(grid: RadialGrid, a: float) -> np.ndarray:
    _check_weight(a, grid.N)
    s = a + grid.N
    weights = grid.surface_const * _power_cell_integrals(grid.m, s) / s
    weights.setflags(write=False)
    return weights


def _radial_transmissibilities(grid: RadialGrid) -> Tuple[np.ndarray, float]:
    """Interior face couplings ``ω ρ_k^{N-1}/h`` and the boundary coupling ``2ω/h``."""
    omega, h = grid.surface_const, grid.h
    interior = omega * grid.faces[:-1] ** (grid.N - 1) / h
    return interior, 2.0 * omega / h


@lru_cache(maxsize=64)
def _radial_stiffness(grid: RadialGrid) -> sp.csc_matrix:
    interior, boundary = _radial_transmissibilities(grid)
    if grid.m == 1:
        return sp.csc_matrix(np.array([[boundary]]))
    diag = np.zeros(grid.m)
    diag[:-1] += interior
    diag[1:] += interior
    diag[-1] += boundary
    return sp.diags([-interior, diag, -interior], [-1, 0, 1], format="csc")


def radial_cells_for(N: int, alpha: float, base: int = 256, per_layer: int = 24) -> int:
    """Cells needed to resolve a ground state whose boundary layer has width ``N/(N+α)``."""
    if alpha <= 0:
        return base
    return max(base, int(math.ceil(per_layer * (N + alpha) / N)))


# ---------------------------------------------------------------------------
# Disk grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskGrid:
    """Polar cell-centred grid on the unit disk, ``m_r`` radial by ``m_t`` angular cells."""

    m_r: int
    m_t: int

    N = 2

    def __post_init__(self) -> None:
        if self.m_r < MIN_RADIAL_CELLS:
            raise GridTooCoarse(f"disk grid needs m_r >= {MIN_RADIAL_CELLS}, got {self.m_r}")
        if self.m_t < MIN_ANGULAR_CELLS:
            raise GridTooCoarse(f"disk grid needs m_t >= {MIN_ANGULAR_CELLS}, got {self.m_t}")

    @property
    def radial(self) -> RadialGrid:
        """The radial grid sharing this grid's ``r_i``."""
        return RadialGrid(2, self.m_r)

    @property
    def h(self) -> float:
        return 1.0 / self.m_r

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.m_t

    @property
    def r(self) -> np.ndarray:
        return self.radial.nodes

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.m_t, dtype=float) * self.dtheta

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.m_r, self.m_t)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(R, Θ)`` arrays of shape ``(m_r, m_t)``."""
        return np.meshgrid(self.r, self.theta, indexing="ij")

    @property
    def volumes(self) -> np.ndarray:
        return self.cell_weights(0.0)

    def cell_weights(self, a: float) -> np.ndarray:
        """Exact cell integrals of ``|x|^a`` with uniform angular weights ``Δθ``."""
        return _disk_weights(self, float(a)).copy()

    def stiffness(self) -> sp.csc_matrix:
        """Symmetric ``K`` on the flattened (C-order) values, ``uᵀKu`` = Dirichlet energy."""
        return _disk_stiffness(self)

    def sample(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> DiskFunction:
        R, T = self.mesh()
        return DiskFunction(self, np.broadcast_to(np.asarray(fn(R, T), dtype=float), self.shape).copy())


@lru_cache(maxsize=64)
def _disk_weights(grid: DiskGrid, a: float) -> np.ndarray:
    _check_weight(a, 2)
    s = a + 2.0
    radial = _power_cell_integrals(grid.m_r, s) / s
    weights = np.repeat((radial * grid.dtheta)[:, None], grid.m_t, axis=1)
    weights.setflags(write=False)
    return weights


@lru_cache(maxsize=32)
def _disk_stiffness(grid: DiskGrid) -> sp.csc_matrix:
    m_r, m_t, h, dt = grid.m_r, grid.m_t, grid.h, grid.dtheta
    n = m_r * m_t
    index = np.arange(n).reshape(m_r, m_t)

    # radial faces between ring i and ring i+1
    rho = grid.radial.faces[:-1]
    t_radial = np.repeat((dt * rho / h)[:, None], m_t, axis=1)
    src_r, dst_r = index[:-1, :].ravel(), index[1:, :].ravel()

    # angular faces between (i, j) and (i, j+1), periodic
    t_angular = np.repeat((h / (grid.r * dt))[:, None], m_t, axis=1)
    src_t, dst_t = index.ravel(), np.roll(index, -1, axis=1).ravel()

    src = np.concatenate([src_r, src_t])
    dst = np.concatenate([dst_r, dst_t])
    weight = np.concatenate([t_radial.ravel(), t_angular.ravel()])

    adjacency = sp.coo_matrix((weight, (src, dst)), shape=(n, n))
    adjacency = (adjacency + adjacency.T).tocsr()
    diag = np.asarray(adjacency.sum(axis=1)).ravel()
    diag[index[-1, :]] += 2.0 * dt / h
    return (sp.diags(diag) - adjacency).tocsc()


# ---------------------------------------------------------------------------
# Functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Values of a radial function at the nodes of a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.m,):
            raise GridMismatch(f"expected {self.grid.m} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("radial function values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.grid.N

    def with_values(self, values: np.ndarray) -> RadialFunction:
        return RadialFunction(self.grid, values)


@dataclass(frozen=True, eq=False)
class DiskFunction:
    """Values of a function on the polar grid of a :class:`DiskGrid`, shape ``(m_r, m_t)``."""

    grid: DiskGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridMismatch(f"expected values of shape {self.grid.shape}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("disk function values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return 2

    @property
    def m_r(self) -> int:
        return self.grid.m_r

    @property
    def m_t(self) -> int:
        return self.grid.m_t

    def with_values(self, values: np.ndarray) -> DiskFunction:
        return DiskFunction(self.grid, np.reshape(values, self.grid.shape))

    def theta_average(self) -> DiskFunction:
        mean = self.values.mean(axis=1, keepdims=True)
        return DiskFunction(self.grid, np.repeat(mean, self.m_t, axis=1))


GridFunction = Union[RadialFunction, DiskFunction]
Grid = Union[RadialGrid, DiskGrid]


# ---------------------------------------------------------------------------
# Quadrature and operators
# ---------------------------------------------------------------------------


def weighted_integral(f: GridFunction, a: float) -> float:
    """Approximate ``∫ |x|^a f dx`` with exact per-cell integration of the weight.

    Raises:
        WeightNotIntegrable: If ``a <= -N``.
    """
    return float(np.sum(f.grid.cell_weights(a) * f.values))


def dirichlet_energy(u: GridFunction) -> float:
    """``∫|∇u|²`` as the quadratic form ``uᵀKu``."""
    flat = u.values.ravel()
    return float(flat @ (u.grid.stiffness() @ flat))


def radial_dirichlet_energy(u: RadialFunction) -> float:
    """``ω∫₀¹ u'(r)² r^{N-1} dr`` of a radial function with ``u(1) = 0``."""
    return dirichlet_energy(u)


def disk_dirichlet_energy(u: DiskFunction) -> float:
    """Discrete ``∫(u_r² + u_θ²/r²) r dr dθ``.

    Raises:
        GridTooCoarse: If the grid has fewer than 3 radial or 8 angular cells.
    """
    return dirichlet_energy(u)


def _laplacian_values(u: GridFunction) -> np.ndarray:
    flat = u.values.ravel()
    return -(u.grid.stiffness() @ flat) / u.grid.volumes.ravel()


def radial_laplacian(u: RadialFunction) -> RadialFunction:
    """Discrete ``u'' + (N-1)u'/r`` with even symmetry at 0 and ``u(1) = 0``.

    Raises:
        GridTooCoarse: If the grid has fewer than 3 cells.
    """
    if u.grid.m < MIN_RADIAL_CELLS:
        raise GridTooCoarse(f"radial laplacian needs m >= {MIN_RADIAL_CELLS}, got {u.grid.m}")
    return RadialFunction(u.grid, _laplacian_values(u))


def disk_laplacian(u: DiskFunction) -> DiskFunction:
    """Gradient of the discrete Dirichlet energy divided by the cell areas, negated."""
    return DiskFunction(u.grid, _laplacian_values(u).reshape(u.grid.shape))


def angular_variation(u: DiskFunction) -> float:
    """Largest spread over θ of a ring, relative to ``max|u|``."""
    scale = float(np.max(np.abs(u.values)))
    if scale == 0.0:
        return 0.0
    spread = u.values.max(axis=1) - u.values.min(axis=1)
    return float(spread.max() / scale)


@dataclass(frozen=True)
class RadialLemmaReport:
    max_violation: float
    gradient_norm: float
    worst_radius: float


def radial_lemma_check(u: RadialFunction) -> RadialLemmaReport:
    """Check ``|u(r)| <= ‖∇u‖ / (√(ω(N-2)) r^{(N-2)/2})`` at every node.

    The check only reports: a positive ``max_violation`` is the size of the
    worst breach, a non-positive one means the bound holds everywhere.
    """
    N = u.grid.N
    if N < 3:
        raise DimensionTooSmall(f"the radial decay bound needs N >= 3, got N={N}")
    gradient_norm = math.sqrt(max(radial_dirichlet_energy(u), 0.0))
    r = u.grid.nodes
    bound = gradient_norm / (math.sqrt(u.grid.surface_const * (N - 2)) * r ** ((N - 2) / 2.0))
    excess = np.abs(u.values) - bound
    worst = int(np.argmax(excess))
    return RadialLemmaReport(float(excess[worst]), gradient_norm, float(r[worst]))


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def _header(f: GridFunction) -> str:
    if isinstance(f, DiskFunction):
        return f"disk 2 {f.m_r} {f.m_t}"
    return f"radial {f.grid.N} {f.grid.m}"


def dump_function(f: GridFunction, stream: IO[str], comments: Optional[Iterable[str]] = None) -> None:
    """Write ``f`` as a header line followed by one value per line (17 significant digits)."""
    for line in comments or ():
        stream.write(f"# {line}\n")
    stream.write(_header(f) + "\n")
    for value in f.values.ravel():
        stream.write(format(float(value), ".17g") + "\n")


def save_function(f: GridFunction, path: Union[str, Path], comments: Optional[Iterable[str]] = None) -> Path:
    """Write ``f`` to ``path`` in the text format, after optional ``#`` comment lines.

    Raises:
        FileAccessError: If the file cannot be written.
    """
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as stream:
            dump_function(f, stream, comments)
    except OSError as exc:
        raise FileAccessError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.debug("Saved %s to %s", _header(f), path)
    return path


def parse_function(lines: Iterable[str]) -> GridFunction:
    """Parse the text format; lines starting with ``#`` before the header are skipped.

    Raises:
        MalformedFile: On a missing or unknown header or a non-numeric value.
    """
    body: List[str] = [line.strip() for line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not body:
        raise MalformedFile("empty grid function file")
    head = body[0].split()
    try:
        values = np.array([float(x) for x in body[1:]], dtype=float)
        sizes = [int(x) for x in head[1:]]
    except ValueError as exc:
        raise MalformedFile(f"grid function file holds a non-numeric entry: {exc}") from exc
    if head[0] == "radial" and len(sizes) == 2:
        grid = RadialGrid(*sizes)
        return RadialFunction(grid, values)
    if head[0] == "disk" and len(sizes) == 3:
        grid = DiskGrid(sizes[1], sizes[2])
        if values.size != grid.m_r * grid.m_t:
            raise GridMismatch(f"expected {grid.m_r * grid.m_t} values, found {values.size}")
        return DiskFunction(grid, values.reshape(grid.shape))
    raise MalformedFile(f"unrecognised grid function header: {body[0]!r}")


def load_function(path: Union[str, Path]) -> GridFunction:
    """Read a grid function written by :func:`save_function`.

    Raises:
        FileAccessError: If the file is missing or unreadable.
        MalformedFile: If its content does not follow the text format.
    """
    try:
        with Path(path).open(encoding="utf-8") as stream:
            return parse_function(stream)
    except OSError as exc:
        raise FileAccessError(f"cannot read {path}: {exc.strerror or exc}") from exc
