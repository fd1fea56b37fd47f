"""Solver options and run configuration."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict

from henon_symmetry_lab.errors import InvalidParameter

logger = logging.getLogger(__name__)

LOG_ENV_VAR = "HSL_LOG"


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and knobs shared by every minimization.

    Args:
        tol: Relative KKT residual at which a descent is declared converged.
        max_iter: Hard cap on descent iterations.
        armijo: Sufficient-decrease constant of the line search.
        backtrack: Step shrink factor per failed line-search trial.
        max_backtracks: Trials before the step is declared stalled.
        stage_tol: Tolerance used while the regularization is still being annealed.
        eps_start: Initial regularization relative to ``max|Δu₀|``.
        eps_floor: Final (absolute) regularization of ``|Δu|^r``.
        seed: Seed for random initial guesses.
        delta: Ratio excess ``S_rad/S_full - 1`` that counts as symmetry breaking.
        margin: Relative margin required by the system symmetry certificate.
        handoff_tol: Descent tolerance at which a superlinear system solve is handed
            to Newton polishing of the discrete pair.
        newton_tol: Euler–Lagrange residual at which Newton polishing stops.
        newton_max_iter: Cap on Newton steps.
        log_every: Emit a DEBUG progress line every this many iterations.
        strict: Raise :class:`~henon_symmetry_lab.errors.NotConverged` instead of
            returning an unconverged result.
    """

    tol: float = 1e-6
    max_iter: int = 50_000
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    stage_tol: float = 1e-3
    eps_start: float = 1e-2
    eps_floor: float = 1e-8
    seed: int = 0
    delta: float = 0.02
    margin: float = 0.0
    handoff_tol: float = 1e-5
    newton_tol: float = 1e-10
    newton_max_iter: int = 40
    log_every: int = 200
    strict: bool = False

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise InvalidParameter(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise InvalidParameter(f"max_iter must be at least 1, got {self.max_iter}")
        if not 0 < self.backtrack < 1:
            raise InvalidParameter(f"backtrack must lie in (0, 1), got {self.backtrack}")
        if not 0 < self.armijo < 1:
            raise InvalidParameter(f"armijo must lie in (0, 1), got {self.armijo}")
        if not self.eps_floor > 0:
            raise InvalidParameter(f"eps_floor must be positive, got {self.eps_floor}")
        if not self.newton_tol > 0:
            raise InvalidParameter(f"newton_tol must be positive, got {self.newton_tol}")

    def replace(self, **changes: Any) -> SolverOptions:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class RunConfig:
    """A CLI command together with every parameter that influences its output."""

    command: str
    params: Dict[str, Any] = field(default_factory=dict)

    def canonical_json(self) -> str:
        return json.dumps({"command": self.command, "params": self.params}, sort_keys=True, default=str)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def provenance(self) -> Dict[str, Any]:
        from henon_symmetry_lab import __version__

        return {
            "version": __version__,
            "command": self.command,
            "config_hash": self.config_hash(),
            "seed": self.params.get("seed"),
        }


def log_level_from_env(default: str = "WARNING") -> int:
    """Resolve the ``HSL_LOG`` environment variable to a logging level."""
    name = os.environ.get(LOG_ENV_VAR, default).strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        logger.warning("Unknown %s level %r, falling back to %s", LOG_ENV_VAR, name, default)
        level = logging.getLevelName(default)
    return level
