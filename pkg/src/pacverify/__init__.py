"""PAC generalisation bounds conditioned on formally verified zero-loss regions."""

from .classic import (
    BoundResult,
    Diagnostics,
    Method,
    RiskQuery,
    hoeffding_bound,
    hoeffding_confidence,
    sample_size_for_bound,
    test_size_increase,
)
from .conditioned import (
    RegionKnowledge,
    closed_form_bound,
    conditional_failure_prob,
    conditioned_bound,
    implicit_bound,
    required_pdelta_for_bound,
    required_pdelta_for_confidence,
    updated_confidence,
)
from .numerics import DomainError, SolverConfig, SolverError
from .region import (
    MembershipSample,
    bound_with_estimated_region,
    clopper_pearson_lower,
    combined_confidence,
    estimate_pdelta,
)
from .validation import (
    CoverageReport,
    DiscreteScenario,
    Point,
    exact_failure_probability,
    hoeffding_lemma_check,
    monte_carlo_coverage,
    region_mass,
    true_risk,
)

__version__ = "0.1.0"
