import math

import pytest

from pacverify import classic
from pacverify.classic import (
    Method,
    RiskQuery,
    hoeffding_bound,
    hoeffding_confidence,
    sample_size_for_bound,
)
from pacverify.numerics import DomainError

from oracles import hoeffding_mp

HOEFFDING_100 = 0.12238734153404082  # sqrt(ln 20 / 200) at 40 digits


def q(**kw):
    base = dict(m=100, delta=0.05, C=1.0, r_hat=0.0, M=1)
    base.update(kw)
    return RiskQuery(**base)


class TestRiskQuery:
    @pytest.mark.parametrize(
        "kw",
        [dict(m=0), dict(m=2.5), dict(delta=0.0), dict(delta=1.5), dict(C=0.0),
         dict(r_hat=-0.1), dict(r_hat=1.1), dict(M=0)],
    )
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            q(**kw)

    def test_error_names_field(self):
        with pytest.raises(DomainError, match="delta"):
            q(delta=2.0)


class TestHoeffdingBound:
    def test_reference_value(self):
        res = hoeffding_bound(q())
        assert res.bound == pytest.approx(HOEFFDING_100, rel=1e-14)
        assert res.bound == pytest.approx(hoeffding_mp(100, 0.05), rel=1e-14)
        assert res.confidence == pytest.approx(0.95)
        assert res.method is Method.CLASSIC

    def test_delta_one_is_zero(self):
        assert hoeffding_bound(q(m=17, delta=1.0)).bound == 0.0

    def test_quarter_at_four_times_m(self):
        assert hoeffding_bound(q(m=400)).bound == pytest.approx(0.5 * HOEFFDING_100, rel=1e-14)

    def test_effective_caps_at_c_minus_r_hat(self):
        res = hoeffding_bound(q(m=2, r_hat=0.9))
        assert res.bound > 0.1
        assert res.diagnostics.effective == pytest.approx(0.1)

    def test_monotonicity_grid(self):
        ms = [10, 30, 100, 300, 1000, 3000, 10_000]
        deltas = [0.001, 0.01, 0.05, 0.1, 0.25, 0.5]
        for d in deltas:
            vals = [hoeffding_bound(q(m=m, delta=d)).bound for m in ms]
            assert all(a > b for a, b in zip(vals, vals[1:]))
        for m in ms:
            vals = [hoeffding_bound(q(m=m, delta=d)).bound for d in deltas]
            assert all(a > b for a, b in zip(vals, vals[1:]))
            vals = [hoeffding_bound(q(m=m, M=M)).bound for M in (1, 2, 10, 1000)]
            assert all(a < b for a, b in zip(vals, vals[1:]))
            vals = [hoeffding_bound(q(m=m, C=C)).bound for C in (0.5, 1, 2, 10)]
            assert all(a < b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("lam", [0.25, 2.0, 7.0])
    def test_scale_equivariance(self, lam):
        base = hoeffding_bound(q(m=250, delta=0.01)).bound
        assert hoeffding_bound(q(m=250, delta=0.01, C=lam)).bound == pytest.approx(lam * base, rel=1e-15)


class TestHoeffdingConfidence:
    def test_direct(self):
        assert hoeffding_confidence(100, 0.1) == pytest.approx(math.exp(-2), rel=1e-15)

    def test_zero_s(self):
        assert hoeffding_confidence(100, 0.0, M=1) == 1.0
        assert hoeffding_confidence(100, 0.0, M=5) == 1.0

    @pytest.mark.parametrize("m", [10, 100, 1000, 10_000])
    @pytest.mark.parametrize("delta", [0.001, 0.05, 0.3])
    @pytest.mark.parametrize("M", [1, 3])
    def test_round_trip(self, m, delta, M):
        s = hoeffding_bound(q(m=m, delta=delta, M=M, C=2.0)).bound
        assert hoeffding_confidence(m, s, M, 2.0) == pytest.approx(delta, abs=1e-12)

    def test_negative(self):
        with pytest.raises(DomainError):
            hoeffding_confidence(10, -0.1)


class TestSampleSize:
    def test_round_trip(self):
        assert sample_size_for_bound(HOEFFDING_100, 0.05) == 100

    def test_direct(self):
        assert sample_size_for_bound(0.05, 0.05) == 600

    def test_halving_quadruples(self):
        for s in (0.2, 0.1, 0.03):
            m1 = sample_size_for_bound(s, 0.05)
            m2 = sample_size_for_bound(s / 2, 0.05)
            assert 4 * m1 - 4 <= m2 <= 4 * m1

    def test_smallest(self):
        for s in (0.3, 0.07, 0.011):
            m = sample_size_for_bound(s, 0.01, M=4, C=2.0)
            assert hoeffding_bound(q(m=m, delta=0.01, M=4, C=2.0)).bound <= s
            if m > 1:
                assert hoeffding_bound(q(m=m - 1, delta=0.01, M=4, C=2.0)).bound > s

    def test_trivial_confidence(self):
        assert sample_size_for_bound(0.01, 1.0) == 1


class TestTestSizeIncrease:
    @pytest.mark.parametrize("d,published", [(0.10, 23), (0.20, 56), (0.30, 104)])
    def test_published_rows(self, d, published):
        assert classic.test_size_increase(d) == pytest.approx(published, abs=1.0)

    def test_law_values(self):
        assert classic.test_size_increase(0.5) == pytest.approx(300.0)
        assert classic.test_size_increase(0.75) == pytest.approx(1500.0)
        assert classic.test_size_increase(0.1) == pytest.approx(100 * (1 / 0.81 - 1))

    @pytest.mark.parametrize("d", [0.1, 0.2, 0.3, 0.5, 0.75])
    def test_consistent_with_sample_size(self, d):
        base = hoeffding_bound(q(m=1000)).bound
        m_new = math.ceil(1000 * (1 + classic.test_size_increase(d) / 100) - 1e-9)
        new = hoeffding_bound(q(m=m_new)).bound
        assert new <= (1 - d) * base * (1 + 1e-12)
        assert hoeffding_bound(q(m=m_new - 1)).bound > (1 - d) * base * (1 - 1e-12) or m_new == 1000
        assert m_new == sample_size_for_bound((1 - d) * base, 0.05)

    @pytest.mark.parametrize("d", [0.0, 1.0, -0.2])
    def test_domain(self, d):
        with pytest.raises(DomainError):
            classic.test_size_increase(d)
