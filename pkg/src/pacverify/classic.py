"""Hoeffding-style PAC bound for a finite hypothesis set and its inversions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

from .numerics import DomainError

__all__ = [
    "Method",
    "RiskQuery",
    "Diagnostics",
    "BoundResult",
    "hoeffding_bound",
    "hoeffding_confidence",
    "sample_size_for_bound",
    "test_size_increase",
]


class Method(str, enum.Enum):
    CLASSIC = "classic"
    IMPLICIT = "implicit"
    CLOSED_FORM = "closed_form"

    @classmethod
    def parse(cls, value: "str | Method") -> "Method":
        if isinstance(value, Method):
            return value
        try:
            return cls(str(value).replace("-", "_").lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise DomainError(f"unknown method {value!r}; expected one of {choices}") from None


@dataclass(frozen=True)
class RiskQuery:
    """Inputs shared by every bound.

    Attributes:
        m: evaluating-sample size.
        delta: failure probability; the bound holds with confidence ``1 - delta``.
        C: losses take values in ``[0, C]``.
        r_hat: empirical risk on the evaluating sample.
        M: number of hypotheses the bound is made uniform over.
    """

    m: int
    delta: float
    C: float = 1.0
    r_hat: float = 0.0
    M: int = 1

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be an integer >= 1 (got {self.m})")
        object.__setattr__(self, "m", int(self.m))
        # delta = 1 is admitted: it is the trivial, zero-confidence statement
        if not 0.0 < self.delta <= 1.0:
            raise DomainError(f"delta must satisfy 0 < delta <= 1 (got {self.delta})")
        if not (self.C > 0 and math.isfinite(self.C)):
            raise DomainError(f"C must be a finite positive real (got {self.C})")
        if not 0.0 <= self.r_hat <= self.C:
            raise DomainError(f"r_hat must satisfy 0 <= r_hat <= C={self.C} (got {self.r_hat})")
        if isinstance(self.M, bool) or int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be an integer >= 1 (got {self.M})")
        object.__setattr__(self, "M", int(self.M))

    def replace(self, **changes: Any) -> "RiskQuery":
        fields = dict(m=self.m, delta=self.delta, C=self.C, r_hat=self.r_hat, M=self.M)
        fields.update(changes)
        return RiskQuery(**fields)


@dataclass(frozen=True)
class Diagnostics:
    iterations: int = 0
    residual: float = 0.0
    clamped: bool = False
    effective: float = math.nan
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundResult:
    """``R <= r_hat + bound`` holds with probability at least ``confidence``."""

    bound: float
    confidence: float
    method: Method
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def __post_init__(self):
        if not self.bound >= 0.0:
            raise DomainError(f"bound must be >= 0 (got {self.bound})")
        if not 0.0 <= self.confidence <= 1.0:
            raise DomainError(f"confidence must lie in [0, 1] (got {self.confidence})")

    def to_dict(self) -> dict:
        d = self.diagnostics
        return {
            "bound": self.bound,
            "confidence": self.confidence,
            "method": self.method.value,
            "diagnostics": {
                "iterations": d.iterations,
                "residual": d.residual,
                "clamped": d.clamped,
                "effective": d.effective,
                **d.extra,
            },
        }


def _effective(q: RiskQuery, bound: float) -> float:
    # the true risk can never exceed C, so anything past C - r_hat is vacuous
    return min(bound, q.C - q.r_hat)


def _classic_value(m: int, delta: float, M: int, C: float) -> float:
    ratio = M / delta
    if ratio <= 1.0:
        return 0.0
    return C * math.sqrt(math.log(ratio) / (2.0 * m))


def hoeffding_bound(q: RiskQuery) -> BoundResult:
    """``C * sqrt(ln(M/delta) / (2m))``, or 0 when ``M/delta <= 1``."""
    bound = _classic_value(q.m, q.delta, q.M, q.C)
    return BoundResult(
        bound=bound,
        confidence=1.0 - q.delta,
        method=Method.CLASSIC,
        diagnostics=Diagnostics(effective=_effective(q, bound)),
    )


def hoeffding_confidence(m: int, s: float, M: int = 1, C: float = 1.0) -> float:
    """Failure probability at which the Hoeffding bound equals ``s``.

    Returns ``min(1, M * exp(-2 m s^2 / C^2))``.
    """
    if s < 0:
        raise DomainError(f"s must be >= 0 (got {s})")
    if m < 1 or M < 1 or not C > 0:
        raise DomainError(f"need m >= 1, M >= 1, C > 0 (got m={m}, M={M}, C={C})")
    return min(1.0, M * math.exp(-2.0 * m * (s / C) ** 2))


def sample_size_for_bound(s_target: float, delta: float, M: int = 1, C: float = 1.0) -> int:
    """Smallest ``m`` whose Hoeffding bound is at most ``s_target``."""
    if not s_target > 0:
        raise DomainError(f"s_target must be > 0 (got {s_target})")
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must satisfy 0 < delta <= 1 (got {delta})")
    if M / delta <= 1.0:
        return 1
    m = max(1, math.ceil(C * C * math.log(M / delta) / (2.0 * s_target * s_target)))
    # the closed-form ceiling can be off by one either way through rounding
    while m > 1 and _classic_value(m - 1, delta, M, C) <= s_target:
        m -= 1
    while _classic_value(m, delta, M, C) > s_target:
        m += 1
    return m


def test_size_increase(decrease: float) -> float:
    """Percentage growth in ``m`` that shrinks the Hoeffding bound by ``decrease``.

    The bound scales as ``1/sqrt(m)``, so the answer is
    ``100 * (1/(1-decrease)^2 - 1)`` whatever the starting ``m``.
    """
    if not 0.0 < decrease < 1.0:
        raise DomainError(f"decrease must satisfy 0 < decrease < 1 (got {decrease})")
    return 100.0 * (1.0 / (1.0 - decrease) ** 2 - 1.0)


# keep pytest from collecting the function above when it is imported by name
test_size_increase.__test__ = False
