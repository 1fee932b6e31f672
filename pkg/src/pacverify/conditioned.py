"""Bounds conditioned on a verified zero-loss region of known probability mass.

With probability ``p`` a draw lands in the verified region (loss 0). Splitting
on how many of the ``m`` evaluating points fall outside the region gives a
binomial mixture of Hoeffding tails, and the functions here evaluate, invert
and approximate that mixture.

Inside the exponent the bound ``s`` is always divided by ``C``. For ``C = 1``
this is the literal mixture; for other ``C`` it is the scaling under which the
``p = 0`` limit is exactly the unconditioned Hoeffding bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classic import BoundResult, Diagnostics, Method, RiskQuery, _classic_value, _effective, hoeffding_bound
from .numerics import (
    DomainError,
    RootResult,
    SolverConfig,
    log_binomial_row,
    log_sum_exp,
    solve_monotone_decreasing,
)

__all__ = [
    "RegionKnowledge",
    "conditional_failure_prob",
    "implicit_bound",
    "closed_form_bound",
    "updated_confidence",
    "required_pdelta_for_confidence",
    "required_pdelta_for_bound",
    "conditioned_bound",
]


@dataclass(frozen=True)
class RegionKnowledge:
    """What is known about the verified region's mass.

    Either the exact mass ``p_delta``, or a membership count (``hits`` of
    ``m_A`` auxiliary draws fell in the region) together with the
    Clopper-Pearson level ``alpha`` used to lower-bound the mass.
    """

    p_delta: float | None = None
    m_A: int | None = None
    hits: int | None = None
    alpha: float | None = None

    def __post_init__(self):
        has_exact = self.p_delta is not None
        est = (self.m_A, self.hits, self.alpha)
        has_est = any(v is not None for v in est)
        if has_exact == has_est:
            raise DomainError("give exactly one of p_delta or (m_A, hits, alpha)")
        if has_exact:
            if not 0.0 <= self.p_delta <= 1.0:
                raise DomainError(f"p_delta must satisfy 0 <= p_delta <= 1 (got {self.p_delta})")
            return
        if any(v is None for v in est):
            raise DomainError("an estimate needs all of m_A, hits and alpha")
        if self.m_A < 1:
            raise DomainError(f"m_A must be >= 1 (got {self.m_A})")
        if not 0 <= self.hits <= self.m_A:
            raise DomainError(f"hits must satisfy 0 <= hits <= m_A={self.m_A} (got {self.hits})")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must satisfy 0 < alpha < 1 (got {self.alpha})")

    @classmethod
    def exact(cls, p_delta: float) -> "RegionKnowledge":
        return cls(p_delta=p_delta)

    @classmethod
    def estimated(cls, m_A: int, hits: int, alpha: float) -> "RegionKnowledge":
        return cls(m_A=m_A, hits=hits, alpha=alpha)

    @property
    def is_estimate(self) -> bool:
        return self.p_delta is None


def _check_p(p_delta: float) -> float:
    if not 0.0 <= p_delta <= 1.0:
        raise DomainError(f"p_delta must satisfy 0 <= p_delta <= 1 (got {p_delta})")
    return float(p_delta)


def _log_mixture_weights(m: int, p: float) -> np.ndarray:
    """ln[C(m,k) p^(m-k) (1-p)^k] for k = 1..m, with 0*ln(0) taken as 0."""
    k = np.arange(1, m + 1, dtype=float)
    inside = m - k
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = math.log(p) if p > 0 else -math.inf
        log_q = math.log1p(-p) if p < 1 else -math.inf
        a = np.where(inside == 0, 0.0, inside * log_p)
        b = k * log_q
    return log_binomial_row(m)[1:] + a + b


def _log_tails(s: float, q: RiskQuery) -> np.ndarray:
    """ln of the Hoeffding tail for each k = 1..m outside-region points."""
    m = q.m
    k = np.arange(1, m + 1, dtype=float)
    shift = (m - k) * q.r_hat / (q.C * k) + s / q.C
    return -2.0 * m * shift * shift


def conditional_failure_prob(s: float, q: RiskQuery, p_delta: float) -> float:
    """Upper bound on P(R > r_hat + s) given zero loss on the verified region.

    Sums, over k = 1..m points outside the region,
    ``C(m,k) exp(-2m((m-k) r_hat/(C k) + s/C)^2) p^(m-k) (1-p)^k``.
    The k = 0 term (every point inside the region) is not part of the sum.
    """
    if s < 0:
        raise DomainError(f"s must be >= 0 (got {s})")
    p = _check_p(p_delta)
    value = math.exp(log_sum_exp(_log_mixture_weights(q.m, p) + _log_tails(s, q)))
    assert 0.0 <= value <= 1.0 + 1e-12, value
    return min(value, 1.0)


def updated_confidence(q: RiskQuery, p_delta: float) -> float:
    """Failure probability of the unconditioned (M = 1) bound once the region is known.

    Each outside-count k contributes ``C(m,k) delta_k p^(m-k) (1-p)^k`` with
    ``delta_k = exp(-2m((m-k) r_hat/(C k) + sqrt(ln(1/delta)/(2m)))^2)``,
    so the result never exceeds ``delta``.
    """
    s0 = _classic_value(q.m, q.delta, 1, q.C)
    return conditional_failure_prob(s0, q, p_delta)


def implicit_bound(q: RiskQuery, p_delta: float, cfg: SolverConfig | None = None) -> BoundResult:
    """Smallest ``s`` whose conditioned failure probability is at most ``delta``.

    The root lies in ``[0, s0]`` with ``s0`` the unconditioned bound, because
    the failure probability at ``s0`` is at most ``delta (1 - p^m)``. When the
    failure probability is already below ``delta`` at ``s = 0`` the bound is 0
    and ``clamped`` is set.
    """
    p = _check_p(p_delta)
    s0 = _classic_value(q.m, q.delta, 1, q.C)
    if s0 == 0.0:
        return BoundResult(0.0, 1.0 - q.delta, Method.IMPLICIT,
                           Diagnostics(effective=0.0, extra={"p_delta": p}))
    cfg = (cfg or SolverConfig()).with_bracket(0.0, s0)
    res = solve_monotone_decreasing(lambda s: conditional_failure_prob(s, q, p) - q.delta, cfg)
    # an overshoot at s0 is rounding (p = 0 makes s0 the exact root), not a clamp
    clamped = res.clamped and res.root == 0.0
    bound = res.root
    return BoundResult(
        bound=bound,
        confidence=1.0 - q.delta,
        method=Method.IMPLICIT,
        diagnostics=Diagnostics(res.iterations, res.residual, clamped, _effective(q, bound), {"p_delta": p}),
    )


def closed_form_bound(q: RiskQuery, p_delta: float) -> BoundResult:
    """Explicit bound obtained from Hoeffding's lemma on the region mixture.

    ``C * sqrt(ln(((1-p) + sqrt((1-p)^2 + 4 d p)) / (2d)) / 2)`` with
    ``d = delta^(1/m)``. It does not use ``r_hat`` and stays positive at
    ``p = 1``.
    """
    p = _check_p(p_delta)
    log_inv_delta = -math.log(q.delta)
    d = math.exp(-log_inv_delta / q.m)
    one_minus_p = 1.0 - p
    # ln(x / (2d)) = ln(1/delta)/m + ln(x/2); the second term is exactly 0 at p = 0
    log_arg = log_inv_delta / q.m + math.log(0.5 * (one_minus_p + math.sqrt(one_minus_p ** 2 + 4.0 * d * p)))
    bound = q.C * math.sqrt(max(log_arg, 0.0) / 2.0)
    return BoundResult(
        bound=bound,
        confidence=1.0 - q.delta,
        method=Method.CLOSED_FORM,
        diagnostics=Diagnostics(effective=_effective(q, bound), extra={"p_delta": p}),
    )


def conditioned_bound(q: RiskQuery, p_delta: float, method: Method | str,
                      cfg: SolverConfig | None = None) -> BoundResult:
    method = Method.parse(method)
    if method is Method.CLASSIC:
        return hoeffding_bound(q)
    if method is Method.IMPLICIT:
        return implicit_bound(q, p_delta, cfg)
    return closed_form_bound(q, p_delta)


def required_pdelta_for_confidence(target_delta: float, q: RiskQuery,
                                   cfg: SolverConfig | None = None) -> RootResult:
    """Region mass at which the fixed Hoeffding bound fails with probability ``target_delta``.

    ``updated_confidence`` falls from ``delta`` at ``p = 0`` to 0 at ``p = 1``,
    so any ``0 < target_delta <= delta`` has a root; larger targets clamp to 0.
    """
    if not target_delta > 0:
        raise DomainError(f"target_delta must be > 0 (got {target_delta})")
    cfg = (cfg or SolverConfig()).with_bracket(0.0, 1.0)
    return solve_monotone_decreasing(lambda p: updated_confidence(q, p) - target_delta, cfg)


def required_pdelta_for_bound(target_s: float, q: RiskQuery,
                              cfg: SolverConfig | None = None) -> RootResult:
    """Region mass at which the implicit bound shrinks to ``target_s``.

    Each evaluation runs a full inner solve for the bound.
    """
    if not target_s > 0:
        raise DomainError(f"target_s must be > 0 (got {target_s})")
    cfg = (cfg or SolverConfig()).with_bracket(0.0, 1.0)
    inner = SolverConfig(abs_tol=cfg.abs_tol, max_iter=cfg.max_iter)
    return solve_monotone_decreasing(lambda p: implicit_bound(q, p, inner).bound - target_s, cfg)
