import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfbounding.bounds import (
    THIRD,
    Method,
    SelfBoundingParams,
    Tail,
    c_plus,
    chernoff_supremum_lower,
    chernoff_supremum_upper,
    chernoff_tail_lower,
    cumulant_bound,
    delta_minus,
    delta_plus,
    evaluate_all,
    lower_tail_improved,
    lower_tail_mcdiarmid_ab,
    lower_tail_symmetric,
    remark_strengthened_upper,
    remark_threshold,
    upper_tail_boucheron_ab,
    upper_tail_improved,
    upper_tail_mcdiarmid_ab,
    upper_tail_symmetric,
)
from selfbounding.errors import DomainError, InvalidParamsError


def P(M=1.0, a=1.0, b=0.0, E=5.0):
    return SelfBoundingParams(M=M, a=a, b=b, mean_z=E)


params_st = st.builds(
    SelfBoundingParams,
    M=st.floats(0.05, 10),
    a=st.floats(0, 5),
    b=st.floats(0.01, 10),
    mean_z=st.floats(0, 100),
)


class TestParams:
    @pytest.mark.parametrize("kw", [dict(M=0), dict(M=-1), dict(a=-0.1), dict(b=-1),
                                    dict(E=-1), dict(M=math.nan)])
    def test_rejects_invalid(self, kw):
        with pytest.raises(InvalidParamsError):
            P(**kw)

    def test_variance_proxy(self):
        assert P(a=2, b=3, E=4).variance_proxy == 11


class TestDeltas:
    @pytest.mark.parametrize("a,M,value,case", [
        (THIRD, 5, 0.0, "a<=1/3"),
        (0.5, 0.75, 1 / 6, "1/2<M<=1"),
        (1.0, 2.0, 1.0, "otherwise"),
        (0.2, 0.75, 0.0, "a<=1/3"),        # first branch wins over the overlap
        (0.6, 2.0, 0.6 - THIRD, "M>1,a<M/(3(M-1))"),
        (1.0, 0.4, 1.0, "otherwise"),      # M <= 1/2 falls through
    ])
    def test_delta_plus(self, a, M, value, case):
        d = delta_plus(a, M)
        assert d.value == pytest.approx(value, abs=1e-15)
        assert d.case == case
        assert d.side == "plus"

    def test_delta_plus_boundary_is_strict(self):
        # a = M / (3 (M - 1)) exactly at M = 2 gives a = 2/3
        assert delta_plus(2 / 3, 2.0).case == "otherwise"

    @pytest.mark.parametrize("a,M,value", [(0.5, 1, 0.0), (0.2, 3, 0.2), (THIRD, 0.1, 0.0)])
    def test_delta_minus(self, a, M, value):
        assert delta_minus(a, M).value == value

    @given(st.floats(0, 5), st.floats(0.01, 10))
    def test_values_in_allowed_set(self, a, M):
        for d in (delta_plus(a, M), delta_minus(a, M)):
            assert d.value in (0.0, a - THIRD, a)
            assert 0 <= d.value <= a

    def test_c_plus(self):
        assert c_plus(1.0) == pytest.approx(1 / 3)
        assert c_plus(0.2) == 0.0


class TestClassical:
    def test_mcdiarmid(self):
        tb = upper_tail_mcdiarmid_ab(P(), 5)
        assert tb.exponent == pytest.approx(-1.25)
        assert tb.probability == pytest.approx(math.exp(-1.25))
        assert upper_tail_mcdiarmid_ab(P(a=0, b=1), 1).exponent == -0.5
        assert upper_tail_mcdiarmid_ab(P(), 1e-9).probability == pytest.approx(1.0)

    def test_boucheron(self):
        assert upper_tail_boucheron_ab(P(), 5).exponent == pytest.approx(-1.875)
        assert upper_tail_boucheron_ab(P(a=THIRD, b=1, E=3), 2).exponent == pytest.approx(-1)
        assert upper_tail_boucheron_ab(P(a=0.2, b=1, E=0), 1).exponent == -0.5

    def test_lower(self):
        tb = lower_tail_mcdiarmid_ab(P(), 5)
        assert tb.exponent == pytest.approx(-1.875)
        assert tb.tail is Tail.LOWER
        assert lower_tail_mcdiarmid_ab(P(a=0, b=3, E=0), 3).exponent == pytest.approx(-1.125)

    def test_zero_denominator(self):
        with pytest.raises(InvalidParamsError):
            upper_tail_mcdiarmid_ab(P(a=0, b=0, E=0), 1.0)

    def test_negative_t_rejected(self):
        with pytest.raises(InvalidParamsError):
            upper_tail_boucheron_ab(P(), -1.0)


class TestCumulant:
    def test_values(self):
        assert cumulant_bound(P(), 1.0).value == pytest.approx(5.0)
        assert cumulant_bound(P(), 0.0).value == 0.0
        cb = cumulant_bound(P(), -1.0)
        assert cb.value == pytest.approx(5 / 3)
        assert cb.branch == "negative-lambda"

    def test_domain(self):
        with pytest.raises(DomainError):
            cumulant_bound(P(), 2.0)
        # a = 0: any lambda
        assert cumulant_bound(P(a=0, b=1), 100.0).value == pytest.approx(5000.0)

    @given(params_st, st.floats(-20, 20))
    def test_algebraic_form(self, p, lam):
        if p.a * p.M * lam >= 2:
            return
        v = cumulant_bound(p, lam).value
        assert v >= 0
        lhs = v * 2 * (1 - p.a * p.M * lam / 2)
        np.testing.assert_allclose(lhs, p.variance_proxy * p.M * lam**2, rtol=1e-12)


class TestMabBounds:
    def test_symmetric_upper(self):
        tb = upper_tail_symmetric(P(), 5)
        assert tb.exponent == pytest.approx(-25 / 15)
        assert tb.probability == pytest.approx(0.188875602837562, rel=1e-12)
        assert upper_tail_symmetric(P(M=2), 5).exponent == pytest.approx(-25 / 30)
        assert upper_tail_symmetric(P(M=0.5), 5).exponent == pytest.approx(-10 / 3)

    def test_symmetric_lower(self):
        assert lower_tail_symmetric(P(), 5).exponent == pytest.approx(-25 / 15)
        tb = lower_tail_symmetric(P(), 6)
        assert not tb.valid and tb.reason == "t > E[Z]"
        assert tb.slack_window == (0.0, 5.0)
        # a = 0: -t^2 / (2 b M)
        assert lower_tail_symmetric(P(a=0, b=2), 2).exponent == pytest.approx(-1.0)

    def test_lower_slack_window(self):
        tb = lower_tail_improved(P(a=1, b=2, E=5), 6)
        assert not tb.valid
        assert tb.slack_window == (0.0, 7.0)

    def test_improved_upper(self):
        assert upper_tail_improved(P(), 5).exponent == pytest.approx(-1.875)
        assert upper_tail_improved(P(a=0.25, b=1, E=4), 2).exponent == pytest.approx(-1.0)
        assert upper_tail_improved(P(M=2), 5).exponent == pytest.approx(-25 / 30)

    def test_improved_lower(self):
        assert lower_tail_improved(P(), 5).exponent == pytest.approx(-2.5)
        assert lower_tail_improved(P(a=0.2, b=1), 1).exponent == pytest.approx(-1 / 4.2)
        assert not lower_tail_improved(P(M=3), 6).valid

    def test_t_zero(self):
        for tb in evaluate_all(P(M=0.4), 0.0):
            assert tb.probability == 1.0

    @settings(max_examples=300)
    @given(params_st, st.floats(1e-3, 100))
    def test_dominance(self, p, t):
        assert upper_tail_improved(p, t).exponent <= upper_tail_symmetric(p, t).exponent
        assert lower_tail_improved(p, t).exponent <= lower_tail_symmetric(p, t).exponent

    @settings(max_examples=300)
    @given(params_st, st.floats(1e-3, 50), st.floats(1e-3, 50))
    def test_nonincreasing_in_t(self, p, t1, t2):
        lo, hi = sorted((t1, t2))
        for fn in (upper_tail_symmetric, upper_tail_improved, lower_tail_symmetric,
                   lower_tail_improved, upper_tail_boucheron_ab, upper_tail_mcdiarmid_ab,
                   lower_tail_mcdiarmid_ab):
            assert fn(p, hi).probability <= fn(p, lo).probability

    @given(params_st, st.floats(0.05, 10), st.floats(1e-3, 50))
    def test_symmetric_nondecreasing_in_M(self, p, M2, t):
        q = SelfBoundingParams(M=M2, a=p.a, b=p.b, mean_z=p.mean_z)
        lo, hi = (p, q) if p.M <= q.M else (q, p)
        assert upper_tail_symmetric(lo, t).probability <= upper_tail_symmetric(hi, t).probability

    def test_improved_nondecreasing_in_M_within_case(self):
        a, t = 1.0, 20.0
        for Ms in (np.linspace(0.05, 0.5, 50), np.linspace(0.51, 1.0, 50),
                   np.linspace(1.01, 5.0, 50)):
            probs = [upper_tail_improved(P(M=M, a=a), t).probability for M in Ms]
            assert np.all(np.diff(probs) >= 0)

    def test_improved_jumps_down_across_case_boundary(self):
        # delta_plus drops from a to a - 1/3 as M crosses 1/2, which can
        # outweigh the 1/M factor for large t
        below = upper_tail_improved(P(M=0.5), 100.0).probability
        above = upper_tail_improved(P(M=0.51), 100.0).probability
        assert above < below


class TestStrengthenedSmallM:
    def test_threshold_value(self):
        # high-precision evaluation of the threshold at a=1, M=0.4, E=5, b=0
        assert remark_threshold(P(M=0.4)) == pytest.approx(203.92304845413264, rel=1e-10)

    def test_threshold_vanishes_as_M_shrinks(self):
        ts = [remark_threshold(P(M=M)) for M in (1e-2, 1e-4, 1e-6, 1e-8)]
        assert np.all(np.diff(ts) < 0)
        # decays like sqrt(M)
        assert ts[-1] < 2e-3

    def test_threshold_infinite_at_half(self):
        assert remark_threshold(P(M=0.5, a=2.5, b=1, E=10)) == math.inf

    def test_exponent_and_window(self):
        tb = remark_strengthened_upper(P(M=0.4), 5)
        assert tb.exponent == pytest.approx(-4.6875)
        assert tb.valid
        assert not remark_strengthened_upper(P(M=0.4), 300).valid

    @pytest.mark.parametrize("M,a", [(0.6, 1.0), (0.4, 0.3)])
    def test_rejects_outside_regime(self, M, a):
        with pytest.raises(InvalidParamsError):
            remark_strengthened_upper(P(M=M, a=a), 1.0)

    def test_included_in_evaluate_all_only_when_applicable(self):
        assert Method.MAB_REMARK in {tb.method for tb in evaluate_all(P(M=0.4), 1)}
        assert Method.MAB_REMARK not in {tb.method for tb in evaluate_all(P(M=1), 1)}


def grid_sup(p, t, lo, hi, n=1_000_001):
    lam = np.linspace(lo, hi, n)[1:-1]
    obj = t * lam - p.variance_proxy * p.M * lam**2 / (2 * (1 - p.a * p.M * lam / 2))
    k = int(np.argmax(obj))
    return obj[k], lam[k]


class TestChernoff:
    def test_upper_values(self):
        v, lam = chernoff_supremum_upper(P(), 5)
        assert v == pytest.approx(30 - 20 * math.sqrt(2), rel=1e-13)
        assert lam == pytest.approx(2 - math.sqrt(2), rel=1e-13)
        v, _ = chernoff_supremum_upper(P(M=2), 5)
        assert v == pytest.approx(15 - 10 * math.sqrt(2), rel=1e-13)
        v, lam = chernoff_supremum_upper(P(), 1e-12)
        assert v < 1e-20 and lam < 1e-10

    def test_upper_grid_oracle(self):
        p = P()
        gv, glam = grid_sup(p, 5, 0, 2 / (p.a * p.M))
        v, lam = chernoff_supremum_upper(p, 5)
        assert abs(gv - v) <= 1e-6
        assert abs(glam - lam) <= 1e-5

    def test_lower_values(self):
        v, lam = chernoff_supremum_lower(P(b=2), 3.5)
        assert v == pytest.approx(28 * (0.75 - math.sqrt(0.5)), rel=1e-13)
        assert lam < 0
        gv, glam = grid_sup(P(b=2), -3.5, -50, 0)
        assert abs(gv - v) <= 1e-6
        v2, _ = chernoff_supremum_lower(P(M=0.5, b=2), 3.5)
        assert v2 == pytest.approx(2 * v, rel=1e-13)

    def test_lower_degenerate(self):
        with pytest.raises(InvalidParamsError):
            chernoff_supremum_lower(P(b=0), 5.0)
        assert not chernoff_tail_lower(P(b=0), 5.0).valid

    def test_a_zero_limit(self):
        p = P(a=0, b=2)
        v, lam = chernoff_supremum_upper(p, 3)
        assert v == pytest.approx(9 / 4)
        assert lam == pytest.approx(3 / 2)
        v_small, _ = chernoff_supremum_upper(P(a=1e-10, b=2), 3)
        assert v_small == pytest.approx(v, rel=1e-8)

    @settings(max_examples=200)
    @given(params_st, st.floats(1e-3, 100))
    def test_optimiser_consistency(self, p, t):
        v, lam = chernoff_supremum_upper(p, t)
        assert lam > 0 and p.a * p.M * lam / 2 < 1
        obj = t * lam - cumulant_bound(p, lam).value
        np.testing.assert_allclose(obj, v, rtol=1e-9)
        # the closed-form Chernoff bound is at least as strong as the simplified one
        assert -v <= upper_tail_symmetric(p, t).exponent * (1 - 1e-12)
