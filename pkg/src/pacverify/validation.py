"""Ground-truth checks on small discrete worlds.

A :class:`DiscreteScenario` is a finite distribution whose points carry a
loss and a flag for membership in the verified region. On such a world the
true risk is known exactly, so every bound can be checked two ways. Exact
enumeration of all size-``m`` samples gives failure probabilities with no
sampling noise. Seeded Monte Carlo estimates coverage for larger ``m``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .classic import Method, RiskQuery
from .conditioned import conditioned_bound
from .numerics import DomainError, log_sum_exp

__all__ = [
    "Point",
    "DiscreteScenario",
    "PerK",
    "ExactFailure",
    "CoverageReport",
    "LemmaCheck",
    "EnumerationBudgetError",
    "ScenarioFormatError",
    "true_risk",
    "region_mass",
    "exact_failure_probability",
    "exact_bound_failure_probability",
    "method_bound_function",
    "trial_rng",
    "monte_carlo_coverage",
    "hoeffding_lemma_check",
    "load_scenario",
    "parse_scenario",
    "scenario_to_dict",
]

ENUMERATION_BUDGET = 10**7
# R - r_hat - s must exceed this to count as a failure; absorbs summation rounding
FAILURE_SLACK = 1e-12


class EnumerationBudgetError(RuntimeError):
    pass


class ScenarioFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    mass: float
    loss: float
    in_region: bool = False


@dataclass(frozen=True)
class DiscreteScenario:
    points: tuple[Point, ...]
    C: float = 1.0
    mass_tol: float = 1e-12

    def __post_init__(self):
        pts = tuple(p if isinstance(p, Point) else Point(*p) for p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise DomainError("a scenario needs at least one point")
        if not (self.C > 0 and math.isfinite(self.C)):
            raise DomainError(f"C must be a finite positive real (got {self.C})")
        for i, p in enumerate(pts):
            if not p.mass > 0:
                raise DomainError(f"points[{i}].mass must be > 0 (got {p.mass})")
            if not 0.0 <= p.loss <= self.C:
                raise DomainError(f"points[{i}].loss must lie in [0, C={self.C}] (got {p.loss})")
            if p.in_region and p.loss != 0.0:
                raise DomainError(f"points[{i}] is in the verified region but has loss {p.loss} != 0")
        total = math.fsum(p.mass for p in pts)
        if abs(total - 1.0) > self.mass_tol:
            raise DomainError(f"point masses must sum to 1 within {self.mass_tol} (got {total!r})")

    @property
    def masses(self) -> np.ndarray:
        return np.array([p.mass for p in self.points])

    @property
    def losses(self) -> np.ndarray:
        return np.array([p.loss for p in self.points])

    @property
    def in_region(self) -> np.ndarray:
        return np.array([p.in_region for p in self.points], dtype=bool)


def true_risk(sc: DiscreteScenario) -> float:
    return math.fsum(p.mass * p.loss for p in sc.points)


def region_mass(sc: DiscreteScenario) -> float:
    return math.fsum(p.mass for p in sc.points if p.in_region)


# ---------------------------------------------------------------------------
# exact enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerK:
    """Statistics for samples with exactly ``k`` of ``m`` points outside the region.

    ``fail_given`` is P(R > r_hat + s | k outside). ``scaled_fail_given``
    replaces ``r_hat`` by the outside-point mean ``(m/k) r_hat``; it is NaN at
    ``k = 0``, as is any conditional with a zero-probability event.
    """

    k: int
    event_prob: float
    fail_given: float
    scaled_fail_given: float


@dataclass(frozen=True)
class ExactFailure:
    unconditional: float
    conditional: float
    per_k: tuple[PerK, ...]


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _samples(sc: DiscreteScenario, m: int, mode: str):
    """Yield ``(weight, r_hat, k_outside)`` over every sample of size ``m``.

    ``multiset`` groups orderings with the multinomial coefficient;
    ``sequence`` walks the raw product space and serves as its cross-check.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1 (got {m})")
    n = len(sc.points)
    masses = [p.mass for p in sc.points]
    losses = [p.loss for p in sc.points]
    outside = [not p.in_region for p in sc.points]
    if mode == "multiset":
        size = math.comb(m + n - 1, m)
        if size > ENUMERATION_BUDGET:
            raise EnumerationBudgetError(f"{size} multisets exceed the budget of {ENUMERATION_BUDGET}")
        m_fact = math.factorial(m)
        for counts in _compositions(m, n):
            coef = m_fact
            weight = 1.0
            for c, w in zip(counts, masses):
                coef //= math.factorial(c)
                weight *= w ** c
            r_hat = math.fsum(c * l for c, l in zip(counts, losses)) / m
            k_out = sum(c for c, o in zip(counts, outside) if o)
            yield coef * weight, r_hat, k_out
    elif mode == "sequence":
        size = n ** m
        if size > ENUMERATION_BUDGET:
            raise EnumerationBudgetError(f"{size} sequences exceed the budget of {ENUMERATION_BUDGET}")
        for seq in itertools.product(range(n), repeat=m):
            weight = math.prod(masses[i] for i in seq)
            r_hat = math.fsum(losses[i] for i in seq) / m
            k_out = sum(outside[i] for i in seq)
            yield weight, r_hat, k_out
    else:
        raise DomainError(f"mode must be 'multiset' or 'sequence' (got {mode!r})")


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else math.nan


def exact_failure_probability(sc: DiscreteScenario, m: int, s: float,
                              mode: str = "multiset") -> ExactFailure:
    """Exact P(R > r_hat + s) over all size-``m`` samples, with its split by k.

    Every scenario already has zero loss on its region, so the conditional
    and unconditional probabilities coincide.
    """
    if s < 0:
        raise DomainError(f"s must be >= 0 (got {s})")
    risk = true_risk(sc)
    event = [0.0] * (m + 1)
    fail = [0.0] * (m + 1)
    scaled = [0.0] * (m + 1)
    for w, r_hat, k in _samples(sc, m, mode):
        event[k] += w
        if risk - r_hat - s > FAILURE_SLACK:
            fail[k] += w
        if k > 0 and risk - (m / k) * r_hat - s > FAILURE_SLACK:
            scaled[k] += w
    total = math.fsum(fail)
    per_k = tuple(
        PerK(k, event[k], _ratio(fail[k], event[k]),
             _ratio(scaled[k], event[k]) if k > 0 else math.nan)
        for k in range(m + 1)
    )
    return ExactFailure(unconditional=total, conditional=total, per_k=per_k)


def exact_bound_failure_probability(sc: DiscreteScenario, m: int,
                                    bound_for: Callable[[float], float],
                                    mode: str = "multiset") -> float:
    """Exact P(R > r_hat + bound_for(r_hat)) for a data-dependent bound."""
    risk = true_risk(sc)
    cache: dict[float, float] = {}
    acc = []
    for w, r_hat, _ in _samples(sc, m, mode):
        if r_hat not in cache:
            cache[r_hat] = bound_for(r_hat)
        if risk - r_hat - cache[r_hat] > FAILURE_SLACK:
            acc.append(w)
    return math.fsum(acc)


def method_bound_function(sc: DiscreteScenario, m: int, delta: float,
                          method: Method | str) -> Callable[[float], float]:
    """``r_hat -> bound`` for one method, with the scenario's exact region mass."""
    method = Method.parse(method)
    p = region_mass(sc)

    @lru_cache(maxsize=None)
    def bound_for(r_hat: float) -> float:
        q = RiskQuery(m=m, delta=delta, C=sc.C, r_hat=min(max(r_hat, 0.0), sc.C))
        return conditioned_bound(q, p, method).bound

    return bound_for


# ---------------------------------------------------------------------------
# Monte Carlo coverage
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageReport:
    trials: int
    coverage: float
    mean_bound: float
    mean_r_hat: float
    seed: int
    method: Method
    m: int = 0
    delta: float = math.nan
    p_delta: float = math.nan
    true_risk: float = math.nan

    def threshold(self, sigmas: float = 3.0) -> float:
        """Lowest coverage consistent with ``1 - delta`` at ``sigmas`` binomial sd."""
        return 1.0 - self.delta - sigmas * math.sqrt(self.delta * (1.0 - self.delta) / self.trials)

    def passes(self, sigmas: float = 3.0) -> bool:
        return self.coverage >= self.threshold(sigmas)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, keyed on ``(seed, trial)`` alone."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def monte_carlo_coverage(sc: DiscreteScenario, m: int, delta: float,
                         method: Method | str = Method.CLASSIC,
                         trials: int = 10_000, seed: int = 0) -> CoverageReport:
    """Fraction of simulated samples on which ``R <= r_hat + bound`` holds.

    Each trial draws ``m`` i.i.d. points from its own generator (see
    :func:`trial_rng`), so results do not depend on trial order.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1 (got {trials})")
    method = Method.parse(method)
    bound_for = method_bound_function(sc, m, delta, method)
    risk = true_risk(sc)
    n = len(sc.points)
    masses = sc.masses
    losses = sc.losses
    covered = 0
    bounds = np.empty(trials)
    r_hats = np.empty(trials)
    for t in range(trials):
        counts = np.bincount(trial_rng(seed, t).choice(n, size=m, p=masses), minlength=n)
        r_hat = float(counts @ losses) / m
        b = bound_for(r_hat)
        bounds[t] = b
        r_hats[t] = r_hat
        if risk - r_hat - b <= FAILURE_SLACK:
            covered += 1
    return CoverageReport(
        trials=trials,
        coverage=covered / trials,
        mean_bound=float(bounds.mean()),
        mean_r_hat=float(r_hats.mean()),
        seed=seed,
        method=method,
        m=m,
        delta=delta,
        p_delta=region_mass(sc),
        true_risk=risk,
    )


# ---------------------------------------------------------------------------
# Hoeffding's lemma
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    """Both sides in the log domain; ``lhs``/``rhs`` may overflow to inf."""

    log_lhs: float
    log_rhs: float

    @property
    def lhs(self) -> float:
        return _safe_exp(self.log_lhs)

    @property
    def rhs(self) -> float:
        return _safe_exp(self.log_rhs)

    @property
    def holds(self) -> bool:
        return self.log_lhs <= self.log_rhs + 1e-12


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def hoeffding_lemma_check(support: Sequence[tuple[float, float]], n: int, t: float,
                          a: float | None = None, b: float | None = None) -> LemmaCheck:
    """Both sides of Hoeffding's lemma for ``n`` i.i.d. copies of a discrete variable.

    The left side ``E exp(t * sum(U_i - E U_i))`` is computed by enumerating
    all ``len(support)**n`` outcomes; the right side is
    ``exp(n t^2 (b-a)^2 / 8)``. ``[a, b]`` defaults to the support's range.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1 (got {n})")
    if not t > 0:
        raise DomainError(f"t must be > 0 (got {t})")
    values = np.array([v for v, _ in support], dtype=float)
    masses = np.array([w for _, w in support], dtype=float)
    if values.size == 0:
        raise DomainError("support must be non-empty")
    if (masses < 0).any() or abs(math.fsum(masses) - 1.0) > 1e-12:
        raise DomainError("support masses must be non-negative and sum to 1")
    a = float(values.min()) if a is None else a
    b = float(values.max()) if b is None else b
    if (values < a).any() or (values > b).any():
        raise DomainError(f"support values must lie in [a, b] = [{a}, {b}]")
    if values.size ** n > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(f"{values.size}**{n} outcomes exceed the budget of {ENUMERATION_BUDGET}")

    centred = values - float(masses @ values)
    keep = masses > 0
    centred, masses = centred[keep], masses[keep]
    sums = np.zeros(1)
    log_w = np.zeros(1)
    for _ in range(n):
        sums = (sums[:, None] + centred[None, :]).ravel()
        log_w = (log_w[:, None] + np.log(masses)[None, :]).ravel()
    log_lhs = log_sum_exp(log_w + t * sums)
    log_rhs = n * t * t * (b - a) ** 2 / 8.0
    return LemmaCheck(log_lhs, log_rhs)


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------


def _field(obj: dict, key: str, where: str):
    if key not in obj:
        raise ScenarioFormatError(f"{where}: missing field '{key}'")
    return obj[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def parse_scenario(text: str, source: str = "<scenario>") -> DiscreteScenario:
    """Build a scenario from JSON text.

    Format::

        {"C": 1.0,
         "points": [{"mass": 0.5, "loss": 0.0, "in_region": true},
                    [0.5, 1.0, false]]}

    Points may be objects or ``[mass, loss, in_region]`` triples. Masses must
    sum to 1 within 1e-9.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ScenarioFormatError(f"{source}: top level must be an object with 'C' and 'points'")
    C = _number(doc.get("C", 1.0), f"{source}: field 'C'")
    raw = _field(doc, "points", source)
    if not isinstance(raw, list) or not raw:
        raise ScenarioFormatError(f"{source}: field 'points' must be a non-empty list")
    points = []
    for i, item in enumerate(raw):
        where = f"{source}: points[{i}]"
        if isinstance(item, dict):
            mass, loss = _field(item, "mass", where), _field(item, "loss", where)
            flag = item.get("in_region", False)
        elif isinstance(item, list) and len(item) == 3:
            mass, loss, flag = item
        else:
            raise ScenarioFormatError(f"{where}: expected an object or a [mass, loss, in_region] triple")
        if not isinstance(flag, bool):
            raise ScenarioFormatError(f"{where}.in_region: expected true/false, got {flag!r}")
        points.append(Point(_number(mass, f"{where}.mass"), _number(loss, f"{where}.loss"), flag))
    try:
        return DiscreteScenario(tuple(points), C=C, mass_tol=1e-9)
    except DomainError as exc:
        raise ScenarioFormatError(f"{source}: {exc}") from None


def load_scenario(path: str | Path) -> DiscreteScenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioFormatError(f"{path}: {exc.strerror}") from None
    return parse_scenario(text, str(path))


def scenario_to_dict(sc: DiscreteScenario) -> dict:
    return {
        "C": sc.C,
        "points": [{"mass": p.mass, "loss": p.loss, "in_region": p.in_region} for p in sc.points],
    }
