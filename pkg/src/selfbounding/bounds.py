"""Tail and cumulant bounds for (M, a, b) self-bounding functions.

Every tail bound has the shape ``P(...) <= exp(exponent)`` and is returned
as a :class:`TailBound` that keeps the raw exponent, so bounds can be
compared even where the probability clamps to 1.

Classical (a, b) bounds ignore ``M``. The (M, a, b) bounds divide the
exponent by ``M`` and replace the coefficient of ``t`` by ``a`` (symmetric
form) or by the piecewise ``delta_plus`` / ``delta_minus`` (improved form).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, InvalidParamsError

THIRD = 1.0 / 3.0


class Tail(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class Method(str, Enum):
    MCDIARMID_AB = "McDiarmid-ab"
    BOUCHERON_AB = "Boucheron-ab"
    MCDIARMID_LOWER_AB = "McDiarmid-lower-ab"
    MAB_SYMMETRIC = "Mab-symmetric"
    MAB_IMPROVED = "Mab-improved"
    MAB_REMARK = "Mab-remark-strengthened"
    CHERNOFF_EXACT = "Chernoff-exact"


@dataclass(frozen=True)
class SelfBoundingParams:
    """(M, a, b) together with the mean E[Z] of the function."""

    M: float
    a: float
    b: float
    mean_z: float

    def __post_init__(self):
        for name in ("M", "a", "b", "mean_z"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParamsError(f"{name} must be finite, got {value}")
        if self.M <= 0:
            raise InvalidParamsError(f"M must be positive, got {self.M}")
        if self.a < 0 or self.b < 0 or self.mean_z < 0:
            raise InvalidParamsError("a, b and mean_z must be nonnegative")

    @property
    def variance_proxy(self) -> float:
        """a E[Z] + b, the quantity every denominator is built from."""
        return self.a * self.mean_z + self.b


@dataclass(frozen=True)
class TailBound:
    exponent: float
    tail: Tail
    method: Method
    t: float
    valid: bool = True
    reason: str | None = None
    # stated window of t for which the bound holds, and the wider window
    # on which the proof actually goes through (lower tails only)
    window: tuple[float, float] = (0.0, math.inf)
    slack_window: tuple[float, float] | None = None

    @property
    def probability(self) -> float:
        return min(1.0, math.exp(self.exponent))


@dataclass(frozen=True)
class DeltaValue:
    value: float
    case: str
    side: str


@dataclass(frozen=True)
class CumulantBound:
    lam: float
    value: float
    branch: str


# case labels for DeltaValue.case
PLUS_SMALL_A = "a<=1/3"
PLUS_MID_M = "1/2<M<=1"
PLUS_LARGE_M = "M>1,a<M/(3(M-1))"
PLUS_OTHERWISE = "otherwise"
MINUS_LARGE_A = "a>=1/3"
MINUS_OTHERWISE = "otherwise"


def _check_aM(a, M):
    if a < 0 or M <= 0:
        raise InvalidParamsError(f"need a >= 0 and M > 0, got a={a}, M={M}")


def delta_plus(a: float, M: float) -> DeltaValue:
    """Coefficient of t in the improved upper-tail denominator.

    Branches are tried in order and the first match wins, so a <= 1/3
    always gives 0 even when 1/2 < M <= 1.
    """
    _check_aM(a, M)
    if a <= THIRD:
        return DeltaValue(0.0, PLUS_SMALL_A, "plus")
    if 0.5 < M <= 1.0:
        return DeltaValue(a - THIRD, PLUS_MID_M, "plus")
    if M > 1.0 and a < M / (3.0 * (M - 1.0)):
        return DeltaValue(a - THIRD, PLUS_LARGE_M, "plus")
    return DeltaValue(a, PLUS_OTHERWISE, "plus")


def delta_minus(a: float, M: float) -> DeltaValue:
    """Coefficient of t in the improved lower-tail denominator."""
    _check_aM(a, M)
    if a >= THIRD:
        return DeltaValue(0.0, MINUS_LARGE_A, "minus")
    return DeltaValue(a, MINUS_OTHERWISE, "minus")


def c_plus(a: float) -> float:
    """max((3a - 1)/6, 0)."""
    return max((3.0 * a - 1.0) / 6.0, 0.0)


def _check_t(t):
    if not (t >= 0 and math.isfinite(t)):
        raise InvalidParamsError(f"t must be a finite nonnegative number, got {t}")


def _exponent(t, denominator, scale=1.0):
    if denominator <= 0:
        if t == 0:
            return 0.0
        raise InvalidParamsError("bound denominator is zero; need a*E[Z] + b > 0")
    return -scale * t * t / denominator


def _lower_window(p: SelfBoundingParams, t: float) -> dict:
    slack = p.mean_z + p.b / p.a if p.a > 0 else math.inf
    kw = {"window": (0.0, p.mean_z), "slack_window": (0.0, slack)}
    if t > p.mean_z:
        kw.update(valid=False, reason="t > E[Z]")
    return kw


# -- classical (a, b) bounds -------------------------------------------------


def upper_tail_mcdiarmid_ab(p: SelfBoundingParams, t: float) -> TailBound:
    _check_t(t)
    e = _exponent(t, 2.0 * (p.variance_proxy + p.a * t))
    return TailBound(e, Tail.UPPER, Method.MCDIARMID_AB, t)


def upper_tail_boucheron_ab(p: SelfBoundingParams, t: float) -> TailBound:
    _check_t(t)
    e = _exponent(t, 2.0 * (p.variance_proxy + c_plus(p.a) * t))
    return TailBound(e, Tail.UPPER, Method.BOUCHERON_AB, t)


def lower_tail_mcdiarmid_ab(p: SelfBoundingParams, t: float) -> TailBound:
    _check_t(t)
    e = _exponent(t, 2.0 * (p.variance_proxy + t / 3.0))
    return TailBound(e, Tail.LOWER, Method.MCDIARMID_LOWER_AB, t)


# -- (M, a, b) bounds -----------------------------------------------------------


def cumulant_bound(p: SelfBoundingParams, lam: float) -> CumulantBound:
    """Upper envelope of log E exp(lam (Z - E Z)), valid for lam < 2/(aM)."""
    if p.a * p.M * lam >= 2.0:
        raise DomainError(f"cumulant bound requires a M lambda < 2, got {p.a * p.M * lam}")
    value = p.variance_proxy * p.M * lam * lam / (2.0 * (1.0 - p.a * p.M * lam / 2.0))
    return CumulantBound(lam, value, "positive-lambda" if lam >= 0 else "negative-lambda")


def upper_tail_symmetric(p: SelfBoundingParams, t: float) -> TailBound:
    _check_t(t)
    e = _exponent(t, 2.0 * p.variance_proxy + p.a * t, 1.0 / p.M)
    return TailBound(e, Tail.UPPER, Method.MAB_SYMMETRIC, t)


def lower_tail_symmetric(p: SelfBoundingParams, t: float) -> TailBound:
    _check_t(t)
    e = _exponent(t, 2.0 * p.variance_proxy + p.a * t, 1.0 / p.M)
    return TailBound(e, Tail.LOWER, Method.MAB_SYMMETRIC, t, **_lower_window(p, t))


def upper_tail_improved(p: SelfBoundingParams, t: float) -> TailBound:
    _check_t(t)
    d = delta_plus(p.a, p.M).value
    e = _exponent(t, 2.0 * p.variance_proxy + d * t, 1.0 / p.M)
    return TailBound(e, Tail.UPPER, Method.MAB_IMPROVED, t)


def lower_tail_improved(p: SelfBoundingParams, t: float) -> TailBound:
    _check_t(t)
    d = delta_minus(p.a, p.M).value
    e = _exponent(t, 2.0 * p.variance_proxy + d * t, 1.0 / p.M)
    return TailBound(e, Tail.LOWER, Method.MAB_IMPROVED, t, **_lower_window(p, t))


def remark_threshold(p: SelfBoundingParams) -> float:
    """Largest t for which delta_plus = a - 1/3 is admissible when M <= 1/2."""
    a, M = p.a, p.M
    if M > 0.5 or a <= THIRD:
        raise InvalidParamsError("strengthened bound needs 0 < M <= 1/2 and a > 1/3")
    g = a - THIRD
    surd = math.sqrt(a * a * M * (1.0 - M + 2.0 * M / (3.0 * a) - 1.0 / (3.0 * a)))
    ratio = (surd + a * (M - 1.0)) / (M * g - a)
    if ratio <= 0:
        # the optimiser never reaches the root of D (e.g. M = 1/2 exactly)
        return math.inf
    return p.variance_proxy / g * (ratio**-2 - 1.0)


def remark_strengthened_upper(p: SelfBoundingParams, t: float) -> TailBound:
    """Upper tail with delta_plus = a - 1/3 for small M, up to a threshold in t."""
    _check_t(t)
    limit = remark_threshold(p)
    e = _exponent(t, 2.0 * p.variance_proxy + (p.a - THIRD) * t, 1.0 / p.M)
    kw = {"window": (0.0, limit)}
    if t > limit:
        kw.update(valid=False, reason=f"t > threshold {limit!r}")
    return TailBound(e, Tail.UPPER, Method.MAB_REMARK, t, **kw)


# -- exact Chernoff suprema ---------------------------------------------------------
#
# sup_lam  t lam - G(lam)  with G the cumulant envelope above.  Written in a
# form where a appears only through x = a t / (2 (aE + b)), so a -> 0 is
# continuous and no a^2 division occurs:
#   4v/(a^2 M) s(x) = t^2 / (v M (1 + x + sqrt(1 + 2x)))


def chernoff_supremum_upper(p: SelfBoundingParams, t: float) -> tuple[float, float]:
    """Return ``(value, lambda_star)`` of the upper-tail Chernoff optimisation."""
    _check_t(t)
    v = p.variance_proxy
    if v <= 0:
        raise InvalidParamsError("Chernoff supremum needs a*E[Z] + b > 0")
    x = p.a * t / (2.0 * v)
    root = math.sqrt(1.0 + 2.0 * x)
    value = t * t / (v * p.M * (1.0 + x + root))
    lam = 2.0 * t / (v * p.M * root * (1.0 + root))
    return value, lam


def chernoff_supremum_lower(p: SelfBoundingParams, t: float) -> tuple[float, float]:
    """Return ``(value, lambda_star)`` of the lower-tail optimisation over lam < 0."""
    _check_t(t)
    v = p.variance_proxy
    if v <= 0:
        raise InvalidParamsError("Chernoff supremum needs a*E[Z] + b > 0")
    if p.a * t >= v:
        raise InvalidParamsError("lower-tail optimiser degenerates for a*t >= a*E[Z] + b")
    x = p.a * t / (2.0 * v)
    root = math.sqrt(1.0 - 2.0 * x)
    value = t * t / (v * p.M * (1.0 - x + root))
    lam = -2.0 * t / (v * p.M * root * (1.0 + root))
    return value, lam


def chernoff_tail_upper(p: SelfBoundingParams, t: float) -> TailBound:
    value, _ = chernoff_supremum_upper(p, t)
    return TailBound(-value, Tail.UPPER, Method.CHERNOFF_EXACT, t)


def chernoff_tail_lower(p: SelfBoundingParams, t: float) -> TailBound:
    kw = _lower_window(p, t)
    if p.a * t >= p.variance_proxy:
        return TailBound(0.0, Tail.LOWER, Method.CHERNOFF_EXACT, t, valid=False,
                         reason="a t >= a E[Z] + b", window=kw["window"])
    value, _ = chernoff_supremum_lower(p, t)
    return TailBound(-value, Tail.LOWER, Method.CHERNOFF_EXACT, t, **kw)


UPPER_BOUNDS = {
    Method.MCDIARMID_AB: upper_tail_mcdiarmid_ab,
    Method.BOUCHERON_AB: upper_tail_boucheron_ab,
    Method.MAB_SYMMETRIC: upper_tail_symmetric,
    Method.MAB_IMPROVED: upper_tail_improved,
    Method.CHERNOFF_EXACT: chernoff_tail_upper,
}

LOWER_BOUNDS = {
    Method.MCDIARMID_LOWER_AB: lower_tail_mcdiarmid_ab,
    Method.MAB_SYMMETRIC: lower_tail_symmetric,
    Method.MAB_IMPROVED: lower_tail_improved,
    Method.CHERNOFF_EXACT: chernoff_tail_lower,
}


def evaluate_all(p: SelfBoundingParams, t: float) -> list[TailBound]:
    """Every applicable bound at ``t``, upper tails first.

    The strengthened small-M bound is included only when its parameter
    condition (M <= 1/2, a > 1/3) holds.
    """
    out = [fn(p, t) for fn in UPPER_BOUNDS.values()]
    if p.M <= 0.5 and p.a > THIRD:
        out.append(remark_strengthened_upper(p, t))
    out.extend(fn(p, t) for fn in LOWER_BOUNDS.values())
    return out
