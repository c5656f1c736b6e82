"""Direct (M, a, b) bound versus rescaling f to f / M and using the (a, b) bound.

All comparisons are made at deviation ``t`` of g = f / M, i.e. deviation
``M t`` of f.  On that scale both upper-tail exponents share the term
2 a E[Z] / M, so the comparison reduces to the two denominators stored on
:class:`ScalingComparison`:

    rescaled:  2 M b + 2 c_+ t        (classical bound applied to g)
    direct:    2 b / M + delta_+ t    (improved bound applied to f)

The smaller denominator gives the tighter bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .bounds import SelfBoundingParams, c_plus, delta_minus, delta_plus

# relative difference below which two denominators count as a tie
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class ScalingComparison:
    t: float
    rescaled_denominator: float
    direct_denominator: float
    tighter: str
    crossover_t: float | None
    paper_threshold_t: float | None
    # 2 a E[Z] / M, dropped from both denominators above
    common_term: float = 0.0
    regime_note: str | None = None
    valid: bool = True

    @property
    def rescaled_exponent(self) -> float:
        return _exponent(self.t, self.rescaled_denominator + self.common_term)

    @property
    def direct_exponent(self) -> float:
        return _exponent(self.t, self.direct_denominator + self.common_term)


def _exponent(t, den):
    if t == 0:
        return 0.0
    return -t * t / den if den > 0 else -math.inf


def _tighter(rescaled, direct):
    if abs(rescaled - direct) <= TIE_RTOL * max(abs(rescaled), abs(direct), 1e-300):
        return "tie"
    return "direct" if direct < rescaled else "rescaled"


def _crossover(const_r, slope_r, const_d, slope_d):
    # const_r + slope_r t = const_d + slope_d t, positive solutions only
    if slope_r == slope_d:
        return None
    t = (const_d - const_r) / (slope_r - slope_d)
    return t if t > 0 else None


def rescale_params(p: SelfBoundingParams) -> SelfBoundingParams:
    """Parameters of g = f / M, which is (1, a, M b) self-bounding."""
    return replace(p, M=1.0, b=p.M * p.b, mean_z=p.mean_z / p.M)


def compare_upper(p: SelfBoundingParams, t: float) -> ScalingComparison:
    a, M, b = p.a, p.M, p.b
    cp = c_plus(a)
    dp = delta_plus(a, M).value
    rescaled = 2.0 * M * b + 2.0 * cp * t
    direct = 2.0 * b / M + dp * t
    crossover = _crossover(2.0 * M * b, 2.0 * cp, 2.0 * b / M, dp)
    note = None if M > 1 else "M <= 1: outside the regime where rescaling is the natural alternative"
    return ScalingComparison(
        t=t,
        rescaled_denominator=rescaled,
        direct_denominator=direct,
        tighter=_tighter(rescaled, direct),
        crossover_t=crossover,
        paper_threshold_t=(2.0 * b / 3.0) * (M - 1.0 / M),
        common_term=2.0 * a * p.mean_z / M,
        regime_note=note,
    )


def compare_lower(p: SelfBoundingParams, t: float) -> ScalingComparison:
    """Improved lower tail for f versus the classical lower tail for f / M.

    The window is t <= E[g] = E[Z] / M (deviation M t <= E[Z] of f).
    """
    a, M, b = p.a, p.M, p.b
    dm = delta_minus(a, M).value
    rescaled = 2.0 * M * b + 2.0 * t / 3.0
    direct = 2.0 * b / M + dm * t
    crossover = _crossover(2.0 * M * b, 2.0 / 3.0, 2.0 * b / M, dm)
    note = None if M > 1 else "M <= 1: direct bound can be looser when b > 0"
    return ScalingComparison(
        t=t,
        rescaled_denominator=rescaled,
        direct_denominator=direct,
        tighter=_tighter(rescaled, direct),
        crossover_t=crossover,
        paper_threshold_t=None,
        common_term=2.0 * a * p.mean_z / M,
        regime_note=note,
        valid=t <= p.mean_z / M,
    )
