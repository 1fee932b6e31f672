"""Special functions and a bracketed root finder.

Everything here is a pure function of its arguments. Sums of
probability-weighted terms are carried in log space and exponentiated once,
since ``p**(m-k) * (1-p)**k`` underflows long before ``m`` reaches the
thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

__all__ = [
    "DomainError",
    "SolverError",
    "SolverConfig",
    "RootResult",
    "log_binomial",
    "log_binomial_row",
    "log_sum_exp",
    "reg_inc_beta",
    "beta_quantile",
    "solve_monotone_decreasing",
]

DEFAULT_ABS_TOL = 1e-12
DEFAULT_MAX_ITER = 200

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 20000


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class SolverError(ArithmeticError):
    """Root finding failed; ``residual`` holds the last function value seen."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SolverConfig:
    abs_tol: float = DEFAULT_ABS_TOL
    max_iter: int = DEFAULT_MAX_ITER
    bracket_lo: float = 0.0
    bracket_hi: float = 1.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be > 0 (got {self.abs_tol})")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1 (got {self.max_iter})")
        if not self.bracket_lo < self.bracket_hi:
            raise DomainError(
                f"bracket_lo < bracket_hi violated ({self.bracket_lo} >= {self.bracket_hi})"
            )

    def with_bracket(self, lo: float, hi: float) -> "SolverConfig":
        return SolverConfig(self.abs_tol, self.max_iter, lo, hi)


@dataclass(frozen=True)
class RootResult:
    root: float
    iterations: int
    residual: float
    clamped: bool = False


# ---------------------------------------------------------------------------
# binomial coefficients
# ---------------------------------------------------------------------------


def _stirling_error(n: int) -> float:
    """ln(n!) minus its Stirling approximation, for integer n >= 1."""
    if n <= 15:
        x = float(n)
        return math.lgamma(x + 1.0) - (x * math.log(x) - x + _HALF_LOG_2PI + 0.5 * math.log(x))
    nn = float(n) * float(n)
    # asymptotic series; truncation error < 1e-17 for n > 15
    return (
        1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * nn)) / nn) / nn) / nn
    ) / n


def log_binomial(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k).

    Uses the Stirling-error decomposition of the factorials so that no large
    ``lgamma`` values are subtracted from each other; this keeps about
    14 significant digits even for ``n`` around a million.

    Raises:
        DomainError: if ``n`` or ``k`` is negative or ``k > n``.
    """
    if n < 0 or k < 0:
        raise DomainError(f"log_binomial needs n, k >= 0 (got n={n}, k={k})")
    if k > n:
        raise DomainError(f"log_binomial needs k <= n (got n={n}, k={k})")
    k = min(k, n - k)
    if k == 0:
        return 0.0
    if k == 1:
        return math.log(n)
    j = n - k
    # k*ln(n/k) + j*ln(n/j), written so that neither term loses precision
    main = k * math.log(n / k) - j * math.log1p(-k / n)
    return (
        main
        - _HALF_LOG_2PI
        - 0.5 * (math.log(k) + math.log(j) - math.log(n))
        + _stirling_error(n)
        - _stirling_error(k)
        - _stirling_error(j)
    )


@lru_cache(maxsize=64)
def _log_binomial_row_cached(n: int) -> np.ndarray:
    row = np.array([log_binomial(n, k) for k in range(n + 1)])
    row.setflags(write=False)
    return row


def log_binomial_row(n: int) -> np.ndarray:
    """Read-only array ``[ln C(n,0), ..., ln C(n,n)]``."""
    if n < 0:
        raise DomainError(f"log_binomial_row needs n >= 0 (got {n})")
    return _log_binomial_row_cached(int(n))


def log_sum_exp(terms: Iterable[float]) -> float:
    """ln(sum(exp(t))) with the max-shift trick. ``-inf`` entries are zero terms."""
    arr = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms, dtype=float)
    if arr.size == 0:
        raise DomainError("log_sum_exp of an empty sequence")
    if np.isnan(arr).any():
        raise DomainError("log_sum_exp received NaN")
    top = float(arr.max())
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return top + math.log(float(np.exp(arr - top).sum()))


# ---------------------------------------------------------------------------
# incomplete beta
# ---------------------------------------------------------------------------


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cf(x: float, a: float, b: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise SolverError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b), i.e. the Beta(a, b) CDF at x."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta needs 0 <= x <= 1 (got x={x})")
    if not (a > 0 and b > 0):
        raise DomainError(f"reg_inc_beta needs a > 0 and b > 0 (got a={a}, b={b})")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    front = math.exp(log_front)
    # the fraction converges quickly only on the near side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _beta_cf(x, a, b) / a
    else:
        value = 1.0 - front * _beta_cf(1.0 - x, b, a) / b
    return min(1.0, max(0.0, value))


def beta_quantile(q: float, a: float, b: float, cfg: SolverConfig | None = None) -> float:
    """Inverse of :func:`reg_inc_beta` in ``x``, located by bisection.

    The CDF is strictly increasing on [0, 1], so the bracket is always valid.
    The result satisfies ``|reg_inc_beta(x, a, b) - q| <= 1e-10``; otherwise
    :class:`SolverError` is raised with the residual.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"beta_quantile needs 0 < q < 1 (got q={q})")
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_quantile needs a > 0 and b > 0 (got a={a}, b={b})")
    if cfg is None:
        cfg = SolverConfig(abs_tol=1e-15, max_iter=DEFAULT_MAX_ITER)
    cfg = cfg.with_bracket(0.0, 1.0)
    res = solve_monotone_decreasing(lambda x: q - reg_inc_beta(x, a, b), cfg)
    if abs(res.residual) > 1e-10:
        raise SolverError(
            f"beta_quantile residual {res.residual:.3e} exceeds 1e-10 (q={q}, a={a}, b={b})",
            res.residual,
        )
    return res.root


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------


def _checked(f: Callable[[float], float], x: float) -> float:
    y = float(f(x))
    if not math.isfinite(y):
        raise SolverError(f"non-finite function value {y} at x={x}", y)
    return y


def solve_monotone_decreasing(f: Callable[[float], float], cfg: SolverConfig) -> RootResult:
    """Bisection for the sign change of a non-increasing function.

    If ``f(bracket_lo) < 0`` the root lies below the bracket and ``bracket_lo``
    is returned; if ``f(bracket_hi) > 0`` it lies above and ``bracket_hi`` is
    returned. Both cases set ``clamped``.
    """
    lo, hi = cfg.bracket_lo, cfg.bracket_hi
    f_lo = _checked(f, lo)
    if f_lo < 0.0:
        return RootResult(lo, 0, f_lo, clamped=True)
    if f_lo == 0.0:
        return RootResult(lo, 0, 0.0)
    f_hi = _checked(f, hi)
    if f_hi > 0.0:
        return RootResult(hi, 0, f_hi, clamped=True)
    if f_hi == 0.0:
        return RootResult(hi, 0, 0.0)

    for it in range(1, cfg.max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # bracket is down to adjacent floats
            break
        f_mid = _checked(f, mid)
        if f_mid == 0.0:
            return RootResult(mid, it, 0.0)
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        if hi - lo <= cfg.abs_tol:
            break
    else:
        if hi - lo > cfg.abs_tol:
            raise SolverError(
                f"bisection did not reach abs_tol={cfg.abs_tol} in {cfg.max_iter} iterations",
                min(abs(f_lo), abs(f_hi)),
            )
    root = 0.5 * (lo + hi)
    return RootResult(root, it, _checked(f, root))
