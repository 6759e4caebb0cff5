"""Tolerance-based classification into rank-level, derivative-vanishing,
and critical sets of a conserved quantity.

Rank decisions come from singular values: with threshold tau relative to
the largest singular value, the numerical rank is the count of singular
values strictly above the threshold.  Every decision carries a margin (how
far the closest singular value sits from the threshold, as a ratio) so
borderline calls are visible instead of silently classified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConservedQuantitySet, as_state
from .differentiate import jacobian, partial_tensor
from .errors import NumericError, UsageError

DEFAULT_RANK_TOL = 1e-8
DEFAULT_VANISH_TOL = 1e-8
ZERO_SIGMA_GUARD = 1e-300
BORDERLINE_MARGIN = 10.0


@dataclass(frozen=True)
class RankDecision:
    """Outcome of a numerical rank determination.

    ``margin`` is the smallest ratio sigma/threshold over kept singular
    values and threshold/sigma over dropped ones; values below
    :data:`BORDERLINE_MARGIN` mean the decision is not robust.
    """

    rank: int
    singular_values: tuple[float, ...]
    rel_tol: float
    threshold: float
    margin: float

    @property
    def borderline(self) -> bool:
        return self.margin < BORDERLINE_MARGIN


@dataclass(frozen=True)
class SetMembership:
    """Verdict for membership in one of the derived sets.

    ``residual`` is negative inside the set and positive outside (distance
    of the decisive statistic from its threshold); ``margin`` mirrors the
    rank-decision convention.
    """

    set_kind: str
    parameter: int
    verdict: bool
    residual: float
    margin: float
    threshold: float


def numerical_rank(matrix, rel_tol: float = DEFAULT_RANK_TOL, zero_floor: float = 0.0) -> RankDecision:
    """SVD-based rank: count of singular values strictly above the threshold.

    The threshold is ``max(rel_tol * sigma_1, zero_floor)``.  A matrix whose
    largest singular value is below an absolute 1e-300 guard (effectively
    the all-zero matrix) has rank 0 outright, since a relative threshold is
    undefined there.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise UsageError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise UsageError("matrix has non-finite entries")
    if not 0.0 < rel_tol < 1.0:
        raise UsageError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    try:
        sv = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed to converge: {exc}") from exc

    sigma = tuple(float(s) for s in sv)
    if not sigma or sigma[0] < ZERO_SIGMA_GUARD:
        return RankDecision(
            rank=0,
            singular_values=sigma,
            rel_tol=rel_tol,
            threshold=max(rel_tol * (sigma[0] if sigma else 0.0), zero_floor),
            margin=np.inf,
        )
    threshold = max(rel_tol * sigma[0], float(zero_floor))
    rank = int(sum(1 for s in sigma if s > threshold))
    ratios = [s / threshold for s in sigma[:rank]]
    ratios += [threshold / s if s > 0.0 else np.inf for s in sigma[rank:]]
    return RankDecision(
        rank=rank,
        singular_values=sigma,
        rel_tol=rel_tol,
        threshold=threshold,
        margin=float(min(ratios)) if ratios else np.inf,
    )


def rank_level(quantity: ConservedQuantitySet, x, rel_tol: float = DEFAULT_RANK_TOL) -> RankDecision:
    """Numerical rank of the quantity's Jacobian at ``x``.

    On top of the relative threshold, an absolute floor
    ``rel_tol * max(1, |x|)`` is applied so that states where every
    gradient entry is numerically zero (round-off of an exactly critical
    point) classify as rank 0 rather than picking up a spurious rank from
    a ~1e-16 singular value.  This aligns the rank-0 decision with the
    first-order vanishing test at matched tolerances.
    """
    xv = as_state(x, quantity.dim)
    J = jacobian(quantity, xv)
    floor = rel_tol * max(1.0, float(np.linalg.norm(xv)))
    return numerical_rank(J, rel_tol, zero_floor=floor)


def in_vanishing_set(
    quantity: ConservedQuantitySet,
    x,
    order: int,
    abs_tol: float = DEFAULT_VANISH_TOL,
) -> SetMembership:
    """Do all partials of all components up to ``order`` vanish at ``x``?

    The verdict is true iff every entry of the partial tensor is at most
    ``abs_tol * max(1, |x|)`` in magnitude.
    """
    if abs_tol <= 0:
        raise UsageError(f"abs_tol must be positive, got {abs_tol}")
    xv = as_state(x, quantity.dim)
    tensor = partial_tensor(quantity, xv, order)
    worst = tensor.max_abs()
    threshold = abs_tol * max(1.0, float(np.linalg.norm(xv)))
    verdict = worst <= threshold
    margin = (threshold / worst if worst > 0.0 else np.inf) if verdict else worst / threshold
    return SetMembership(
        set_kind="vanishing",
        parameter=order,
        verdict=verdict,
        residual=worst - threshold,
        margin=float(margin),
        threshold=threshold,
    )


def in_critical_set(
    quantity: ConservedQuantitySet, x, rel_tol: float = DEFAULT_RANK_TOL
) -> SetMembership:
    """Is the Jacobian rank at ``x`` below the maximum rank k?"""
    decision = rank_level(quantity, x, rel_tol)
    sigma_k = decision.singular_values[quantity.k - 1] if decision.singular_values else 0.0
    verdict = decision.rank < quantity.k
    return SetMembership(
        set_kind="critical",
        parameter=quantity.k,
        verdict=verdict,
        residual=sigma_k - decision.threshold,
        margin=decision.margin,
        threshold=decision.threshold,
    )
