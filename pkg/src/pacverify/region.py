"""Estimating the verified region's mass from membership counts.

An auxiliary i.i.d. sample of size ``m_A`` is checked against the region.
The one-sided Clopper-Pearson limit ``p_L`` lower-bounds the mass with
probability ``1 - alpha``. The conditioned bound is then evaluated at
``p_L``, and the failure probabilities combine as ``delta + alpha (1 - delta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .classic import BoundResult, Method, RiskQuery
from .conditioned import RegionKnowledge, conditioned_bound
from .numerics import DomainError, SolverConfig, beta_quantile

__all__ = [
    "MembershipSample",
    "estimate_pdelta",
    "clopper_pearson_lower",
    "combined_confidence",
    "bound_with_estimated_region",
    "bound_from_knowledge",
]


@dataclass(frozen=True)
class MembershipSample:
    m_A: int
    hits: int

    def __post_init__(self):
        if self.m_A < 1:
            raise DomainError(f"m_A must be >= 1 (got {self.m_A})")
        if not 0 <= self.hits <= self.m_A:
            raise DomainError(f"hits must satisfy 0 <= hits <= m_A={self.m_A} (got {self.hits})")


def estimate_pdelta(ms: MembershipSample) -> float:
    return ms.hits / ms.m_A


def clopper_pearson_lower(ms: MembershipSample, alpha: float) -> float:
    """Lower end of the one-sided ``1 - alpha`` Clopper-Pearson interval.

    This is the ``alpha`` quantile of Beta(hits, m_A - hits + 1). With no hits
    the first shape parameter is 0, the Beta law is degenerate at 0, and the
    limit is 0.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must satisfy 0 < alpha < 1 (got {alpha})")
    if ms.hits == 0:
        return 0.0
    return beta_quantile(alpha, ms.hits, ms.m_A - ms.hits + 1)


def combined_confidence(delta: float, alpha: float) -> float:
    """Total failure probability ``delta + alpha (1 - delta)``.

    Endpoints 0 are accepted so that the degenerate cases reduce cleanly.
    """
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must satisfy 0 <= delta <= 1 (got {delta})")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must satisfy 0 <= alpha <= 1 (got {alpha})")
    return delta + alpha * (1.0 - delta)


def bound_with_estimated_region(q: RiskQuery, ms: MembershipSample, alpha: float,
                                method: Method | str = Method.CLOSED_FORM,
                                cfg: SolverConfig | None = None) -> BoundResult:
    """Conditioned bound evaluated at the Clopper-Pearson lower limit.

    The reported confidence is ``1 - (delta + alpha (1 - delta))``; the
    diagnostics record the point estimate ``p_hat`` and the limit ``p_L``.
    """
    method = Method.parse(method)
    if method is Method.CLASSIC:
        raise DomainError("bound_with_estimated_region needs method implicit or closed_form")
    p_hat = estimate_pdelta(ms)
    p_low = clopper_pearson_lower(ms, alpha)
    res = conditioned_bound(q, p_low, method, cfg)
    extra = dict(res.diagnostics.extra)
    extra.update(p_hat=p_hat, p_L=p_low, alpha=alpha)
    return BoundResult(
        bound=res.bound,
        confidence=1.0 - combined_confidence(q.delta, alpha),
        method=res.method,
        diagnostics=replace(res.diagnostics, extra=extra),
    )


def bound_from_knowledge(q: RiskQuery, rk: RegionKnowledge, method: Method | str,
                         cfg: SolverConfig | None = None) -> BoundResult:
    """Dispatch on whether the region mass is exact or estimated."""
    method = Method.parse(method)
    if not rk.is_estimate or method is Method.CLASSIC:
        return conditioned_bound(q, rk.p_delta or 0.0, method, cfg)
    return bound_with_estimated_region(q, MembershipSample(rk.m_A, rk.hits), rk.alpha, method, cfg)
