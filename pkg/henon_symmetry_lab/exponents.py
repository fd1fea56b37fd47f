"""Critical exponents, critical hyperbolas and existence and symmetry hypotheses.

Everything here is plain arithmetic on ``(N, p, q, alpha, beta)``. Callers get
back small frozen records, so the functions are safe to call from any worker.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

from henon_symmetry_lab.errors import DimensionTooSmall, InvalidParameter, WeightOutOfRange

logger = logging.getLogger(__name__)

Side = Literal["Below", "On", "Above"]

DEFAULT_ON_TOL = 1e-12


@dataclass(frozen=True)
class ProblemSpec:
    """Dimension, weights and exponents of the weighted system on the unit ball.

    The system reads ``-Δu = |x|^β v^q``, ``-Δv = |x|^α u^p``; the scalar problem
    only uses ``(N, alpha, p)``. ``p = 1`` and ``q = 1`` are admitted so the
    linear eigenvalue problems can be expressed, every existence verdict
    still asks for ``p, q > 1``.
    """

    N: int
    alpha: float = 0.0
    beta: float = 0.0
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 2:
            raise DimensionTooSmall(f"dimension N must be an integer >= 2, got {self.N}")
        if not self.p >= 1:
            raise InvalidParameter(f"exponent p must be >= 1, got p={self.p}")
        if not self.q >= 1:
            raise InvalidParameter(f"exponent q must be >= 1, got q={self.q}")
        if not self.alpha > -self.N:
            raise WeightOutOfRange(f"weight alpha={self.alpha} must exceed -N={-self.N}")
        if not self.beta > -self.N:
            raise WeightOutOfRange(f"weight beta={self.beta} must exceed -N={-self.N}")

    def to_dict(self) -> Dict[str, float]:
        return {"N": self.N, "alpha": self.alpha, "beta": self.beta, "p": self.p, "q": self.q}


@dataclass(frozen=True)
class HypothesisVerdict:
    """Whether one hypothesis holds, with the condition that decided it."""

    holds: bool
    reason: str


@dataclass(frozen=True)
class HyperbolaReport:
    """Position of a spec relative to the weighted and unweighted hyperbolas."""

    gap: float
    side: Side
    m_gap: float
    hypotheses: Dict[str, HypothesisVerdict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "side": self.side,
            "m_gap": self.m_gap,
            "hypotheses": {k: {"holds": v.holds, "reason": v.reason} for k, v in self.hypotheses.items()},
        }


@dataclass(frozen=True)
class TheoreticalSlopes:
    """Exponents of α in the asymptotic level estimates."""

    scalar_rad: float
    scalar_upper: float
    system_rad_lower: Optional[float] = None
    system_upper: Optional[float] = None


@dataclass(frozen=True)
class ScalarReport:
    """Where ``p + 1`` sits relative to the scalar critical exponents."""

    N: int
    p: float
    alpha: float
    sobolev_exponent: float
    ni_exponent: float
    radial_existence: bool
    pohozaev_nonexistence: bool
    full_space_subcritical: bool
    symmetry_breaking_for_large_alpha: bool


# ---------------------------------------------------------------------------
# Critical exponents
# ---------------------------------------------------------------------------


def critical_exponent(N: int, order: int = 1) -> float:
    """Sobolev critical exponent ``2N/(N-2)`` (order 1) or ``2N/(N-4)`` (order 2).

    Raises:
        DimensionTooSmall: If ``N <= 2`` for order 1 or ``N <= 4`` for order 2.
        InvalidParameter: If ``order`` is not 1 or 2.
    """
    if order == 1:
        if N < 3:
            raise DimensionTooSmall(f"2* = 2N/(N-2) needs N >= 3, got N={N}")
        return 2.0 * N / (N - 2)
    if order == 2:
        if N < 5:
            raise DimensionTooSmall(f"2** = 2N/(N-4) needs N >= 5, got N={N}")
        return 2.0 * N / (N - 4)
    raise InvalidParameter(f"order must be 1 or 2, got {order}")


def ni_exponent(N: int, alpha: float) -> float:
    """Critical exponent ``2* + 2α/(N-2)`` of the radial Hénon problem."""
    if N < 3:
        raise DimensionTooSmall(f"the radial critical exponent needs N >= 3, got N={N}")
    if not alpha > -N:
        raise WeightOutOfRange(f"weight alpha={alpha} must exceed -N={-N}")
    return 2.0 * N / (N - 2) + 2.0 * alpha / (N - 2)


def hyperbola_gap(spec: ProblemSpec) -> float:
    """``(N+α)/(p+1) + (N+β)/(q+1) - (N-2)``; positive means subcritical."""
    N = spec.N
    return (N + spec.alpha) / (spec.p + 1) + (N + spec.beta) / (spec.q + 1) - (N - 2)


def m_gap(spec: ProblemSpec) -> float:
    """Gap of the unweighted hyperbola ``N/(p+1) + N/(q+1) = N - 2``."""
    N = spec.N
    return N / (spec.p + 1) + N / (spec.q + 1) - (N - 2)


def _side(gap: float, tol: float) -> Side:
    if gap > tol:
        return "Below"
    if gap < -tol:
        return "Above"
    return "On"


# ---------------------------------------------------------------------------
# Hypotheses
# ---------------------------------------------------------------------------

_Check = Tuple[bool, str]


def _verdict(checks: Sequence[_Check]) -> HypothesisVerdict:
    for ok, text in checks:
        if not ok:
            return HypothesisVerdict(False, f"fails: {text}")
    return HypothesisVerdict(True, "holds: " + "; ".join(text for _, text in checks))


def _hypotheses(spec: ProblemSpec, gap: float, mg: float, tol: float) -> Dict[str, HypothesisVerdict]:
    N, a, b, p, q = spec.N, spec.alpha, spec.beta, spec.p, spec.q
    superlinear: List[_Check] = [(p > 1, f"p={p} > 1"), (q > 1, f"q={q} > 1")]
    below: _Check = (gap > tol, f"gap={gap:.6g} > 0")
    breaking_threshold = N / ((N - 1) * q - 1) if (N - 1) * q > 1 else math.inf
    breaking: _Check = (p > breaking_threshold, f"p={p} > N/((N-1)q-1)={breaking_threshold:.6g}")
    mixed_gap = N / (p + 1) + (N + b) / (q + 1) - (N - 2)

    caps: List[_Check] = []
    if N >= 5:
        caps = [
            (p + 1 < 2 * (N + a) / (N - 4), f"p+1={p + 1} < 2(N+alpha)/(N-4)={2 * (N + a) / (N - 4):.6g}"),
            (q + 1 < 2 * (N + b) / (N - 4), f"q+1={q + 1} < 2(N+beta)/(N-4)={2 * (N + b) / (N - 4):.6g}"),
        ]

    henon_weights: List[_Check] = [(a > 0, f"alpha={a} > 0"), (b >= 0, f"beta={b} >= 0")]
    mixed_weights: List[_Check] = [(a > 0, f"alpha={a} > 0"), (-N < b < 0, f"-N < beta={b} < 0")]
    hardy_weights: List[_Check] = [(-N < a <= 0, f"-N < alpha={a} <= 0"), (-N < b <= 0, f"-N < beta={b} <= 0")]
    ground_state: _Check = (mg > tol, f"N/(p+1)+N/(q+1)-(N-2)={mg:.6g} > 0")
    mixed_ground: _Check = (mixed_gap > tol, f"N/(p+1)+(N-|beta|)/(q+1)-(N-2)={mixed_gap:.6g} > 0")
    henon_index = a * N / (N + a) + b * N / (N + b)

    return {
        "negative_weights_existence": _verdict(
            [
                *superlinear,
                (-N < a < 0, f"-N < alpha={a} < 0"),
                (-N < b < 0, f"-N < beta={b} < 0"),
                below,
                (1 / (p + 1) + 1 / (q + 1) < 1, f"1/(p+1)+1/(q+1)={1 / (p + 1) + 1 / (q + 1):.6g} < 1"),
                *caps,
            ]
        ),
        "hardy_case_existence": _verdict([*superlinear, below, *hardy_weights, (a + b > -4, f"alpha+beta={a + b} > -4")]),
        "henon_case_existence": _verdict(
            [
                *superlinear,
                below,
                (a >= 0 and b >= 0, f"alpha={a}, beta={b} >= 0"),
                (henon_index < 4, f"alpha N/(N+alpha)+beta N/(N+beta)={henon_index:.6g} < 4"),
            ]
        ),
        "mixed_case_existence": _verdict([*superlinear, below, (-N < b <= 0 <= a, f"-N < beta={b} <= 0 <= alpha={a}")]),
        "starshaped_nonexistence": _verdict([(gap <= tol, f"gap={gap:.6g} <= 0")]),
        "hardy_ground_state": _verdict([*superlinear, *hardy_weights, below]),
        "concentration_regime": _verdict(
            [(N >= 8, f"N={N} >= 8"), (0 <= a < p * N, f"0 <= alpha={a} < pN={p * N}"), (b > 0, f"beta={b} > 0")]
        ),
        "henon_nonexistence": _verdict([*henon_weights, (gap <= tol, f"gap={gap:.6g} <= 0")]),
        "henon_radial_existence": _verdict(
            [*superlinear, *henon_weights, (q > max(1.0, b / N), f"q={q} > max(1, beta/N)={max(1.0, b / N):.6g}"), below]
        ),
        "henon_ground_state": _verdict([*superlinear, *henon_weights, ground_state]),
        "henon_symmetry_breaking": _verdict([*superlinear, *henon_weights, ground_state, breaking]),
        "mixed_radial_existence": _verdict([*superlinear, *mixed_weights, below]),
        "mixed_ground_state": _verdict([*superlinear, *mixed_weights, mixed_ground]),
        "mixed_symmetry_breaking": _verdict([*superlinear, *mixed_weights, mixed_ground, breaking]),
    }


def classify_point(spec: ProblemSpec, tol: float = DEFAULT_ON_TOL) -> HyperbolaReport:
    """Classify a spec against the weighted critical hyperbola.

    Args:
        spec: The problem to classify.
        tol: Absolute tolerance within which the point counts as on the hyperbola.

    Returns:
        A :class:`HyperbolaReport` with the signed gap, the side, the gap of the
        unweighted hyperbola and one :class:`HypothesisVerdict` per hypothesis key.

    Example:
        ```python
        report = classify_point(ProblemSpec(N=3, p=5, q=5))
        assert report.side == "On"
        assert report.hypotheses["starshaped_nonexistence"].holds
        ```
    """
    if tol < 0:
        raise InvalidParameter(f"tol must be >= 0, got {tol}")
    gap = hyperbola_gap(spec)
    mg = m_gap(spec)
    return HyperbolaReport(gap=gap, side=_side(gap, tol), m_gap=mg, hypotheses=_hypotheses(spec, gap, mg, tol))


def classify_scalar(N: int, p: float, alpha: float) -> ScalarReport:
    """Place ``p + 1`` against ``2*`` and the radial critical exponent ``2*_α``."""
    if N < 2:
        raise DimensionTooSmall(f"dimension N must be >= 2, got {N}")
    if not alpha > -N:
        raise WeightOutOfRange(f"weight alpha={alpha} must exceed -N={-N}")
    if N == 2:
        sobolev = ni = math.inf
    else:
        sobolev = critical_exponent(N, 1)
        ni = ni_exponent(N, alpha)
    return ScalarReport(
        N=N,
        p=p,
        alpha=alpha,
        sobolev_exponent=sobolev,
        ni_exponent=ni,
        radial_existence=p > 1 and p + 1 < ni,
        pohozaev_nonexistence=p + 1 >= ni,
        full_space_subcritical=p + 1 < sobolev,
        symmetry_breaking_for_large_alpha=2 < p + 1 < sobolev,
    )


def theoretical_slopes(N: int, p: float, q: Optional[float] = None) -> TheoreticalSlopes:
    """Exponents of α in the radial and boundary-bump level estimates.

    With ``r = (q+1)/q``: scalar radial ``1 + 2/(p+1)``, scalar upper
    ``2 - N + 2N/(p+1)``, system radial lower ``2r + r/(p+1) - 1 - 1/q`` and
    system upper ``2r - N + Nr/(p+1)``. System entries are ``None`` without q.
    """
    scalar_rad = 1 + 2 / (p + 1)
    scalar_upper = 2 - N + 2 * N / (p + 1)
    if q is None:
        return TheoreticalSlopes(scalar_rad, scalar_upper)
    r = (q + 1) / q
    return TheoreticalSlopes(
        scalar_rad=scalar_rad,
        scalar_upper=scalar_upper,
        system_rad_lower=2 * r + r / (p + 1) - 1 - 1 / q,
        system_upper=2 * r - N + N * r / (p + 1),
    )


def region_samples(
    N: int, alpha: float, beta: float, p1_values: Iterable[float], q1_values: Iterable[float], tol: float = DEFAULT_ON_TOL
) -> List[Tuple[float, float, float, float, Side]]:
    """Sample the ``(p+1, q+1)`` plane; rows are ``(p+1, q+1, gap, m_gap, side)``."""
    q1_list = list(q1_values)
    rows = []
    for p1 in p1_values:
        for q1 in q1_list:
            gap = (N + alpha) / p1 + (N + beta) / q1 - (N - 2)
            mg = N / p1 + N / q1 - (N - 2)
            rows.append((float(p1), float(q1), gap, mg, _side(gap, tol)))
    return rows
