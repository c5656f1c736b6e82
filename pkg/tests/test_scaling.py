import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selfbounding.bounds import (
    SelfBoundingParams,
    lower_tail_improved,
    lower_tail_mcdiarmid_ab,
    upper_tail_boucheron_ab,
    upper_tail_improved,
)
from selfbounding.scaling import compare_lower, compare_upper, rescale_params


def P(M, a, b, E=10.0):
    return SelfBoundingParams(M=M, a=a, b=b, mean_z=E)


class TestRescale:
    @pytest.mark.parametrize("before,after", [
        ((2, 1, 3, 10), (1, 1, 6, 5)),
        ((1, 0.7, 2, 4), (1, 0.7, 2, 4)),
        ((0.5, 2, 4, 8), (1, 2, 2, 16)),
    ])
    def test_examples(self, before, after):
        assert rescale_params(P(*before)) == P(*after)


class TestUpper:
    def test_example(self):
        c = compare_upper(P(2, 2, 3), 3.0)
        assert c.rescaled_denominator == pytest.approx(17)
        assert c.direct_denominator == pytest.approx(9)
        assert c.tighter == "direct"
        assert c.crossover_t == pytest.approx(27, rel=1e-12)
        assert c.paper_threshold_t == pytest.approx(3)

    def test_zero_b_rescaling_wins_when_delta_is_a(self):
        # c_plus = 1/3 while delta_plus = a = 1 on the last branch
        for t in (0.5, 3.0, 40.0):
            c = compare_upper(P(2, 1, 0), t)
            assert c.rescaled_denominator == pytest.approx(2 * t / 3)
            assert c.direct_denominator == pytest.approx(t)
            assert c.tighter == "rescaled"

    @given(st.floats(1.01, 10), st.floats(0.34, 3), st.floats(0.01, 50))
    def test_tie_when_b_zero_and_delta_matches(self, M, a, t):
        # delta_plus = a - 1/3 = 2 c_plus on the middle branches
        c = compare_upper(P(M, a, 0.0), t)
        if c.tighter != "tie":
            assert a >= M / (3 * (M - 1))
        else:
            assert c.rescaled_denominator == pytest.approx(c.direct_denominator, rel=1e-12)

    @given(st.floats(1.01, 10), st.floats(0.34, 3), st.floats(0.01, 10), st.floats(0.01, 50))
    def test_direct_strictly_tighter_with_b(self, M, a, b, t):
        if a >= M / (3 * (M - 1)):
            return
        assert compare_upper(P(M, a, b), t).tighter == "direct"

    @given(st.floats(0.1, 10), st.floats(0, 3), st.floats(0, 10))
    def test_crossover_solves_equality(self, M, a, b):
        c = compare_upper(P(M, a, b), 1.0)
        if c.crossover_t is None:
            return
        at = compare_upper(P(M, a, b), c.crossover_t)
        gap = abs(at.rescaled_denominator - at.direct_denominator)
        assert gap <= 1e-9 * max(at.rescaled_denominator, at.direct_denominator)

    def test_consistent_with_bounds(self):
        # on the g scale, exponents equal the tail bounds evaluated at deviation M t of f
        p, t = P(2.0, 0.6, 1.5, 10.0), 2.5
        c = compare_upper(p, t)
        direct = upper_tail_improved(p, p.M * t).exponent
        assert c.direct_exponent == pytest.approx(direct, rel=1e-12)
        g = rescale_params(p)
        rescaled = upper_tail_boucheron_ab(g, t).exponent
        assert c.rescaled_exponent == pytest.approx(rescaled, rel=1e-12)

    def test_regime_note(self):
        assert compare_upper(P(0.5, 1, 1), 1.0).regime_note
        assert compare_upper(P(2, 1, 1), 1.0).regime_note is None


class TestLower:
    def test_example(self):
        c = compare_lower(P(1, 1, 0, 5), 5.0)
        assert c.direct_exponent == pytest.approx(-2.5)
        assert c.rescaled_exponent == pytest.approx(-1.875)
        assert c.tighter == "direct"
        assert c.valid

    def test_small_a_example(self):
        c = compare_lower(P(2, 0.2, 1, 5), 2.0)
        assert c.direct_denominator == pytest.approx(1 + 0.4)
        assert c.rescaled_denominator == pytest.approx(4 + 4 / 3)
        assert c.tighter == "direct"

    def test_consistent_with_bounds(self):
        p, t = P(2.0, 0.2, 1.0, 5.0), 1.5
        c = compare_lower(p, t)
        assert c.direct_exponent == pytest.approx(
            lower_tail_improved(p, p.M * t).exponent, rel=1e-12)
        assert c.rescaled_exponent == pytest.approx(
            lower_tail_mcdiarmid_ab(rescale_params(p), t).exponent, rel=1e-12)

    def test_tie_in_the_limit(self):
        c = compare_lower(P(2, 1, 1), 1e-12)
        assert c.direct_exponent == pytest.approx(0, abs=1e-20)
        assert c.rescaled_exponent == pytest.approx(0, abs=1e-20)

    def test_window(self):
        assert compare_lower(P(2, 1, 1, 10), 5.0).valid
        assert not compare_lower(P(2, 1, 1, 10), 5.1).valid

    def test_direct_tighter_for_large_M(self):
        rng = np.random.default_rng(7)
        for _ in range(2000):
            M, a, b, E = rng.uniform(1.01, 10), rng.uniform(0, 3), rng.uniform(0, 10), rng.uniform(0.1, 50)
            t = rng.uniform(1e-6, E / M)
            assert compare_lower(P(M, a, b, E), t).tighter in ("direct", "tie")

    def test_rescaling_can_win_below_unit_M(self):
        # with M < 1 the 2b/M term exceeds 2Mb, so small t favours rescaling
        assert compare_lower(P(0.5, 1.0, 2.0, 10.0), 0.1).tighter == "rescaled"
